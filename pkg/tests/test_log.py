import pytest
from loguru import logger

from core.log import configure


@pytest.fixture(autouse=True)
def default_logging():
    yield
    configure()


class TestConfigure:
    def test_sink_writes_to_the_current_stderr(self, capsys):
        configure("INFO", colorize=False)
        logger.info("fixpoint reached")
        logger.debug("hidden")
        assert capsys.readouterr().err == "[INFO] fixpoint reached\n"

    def test_sink_keeps_writing_after_a_read(self, capsys):
        configure("WARNING", colorize=False)
        capsys.readouterr()
        logger.warning("first")
        first = capsys.readouterr().err
        logger.warning("second")
        assert (first, capsys.readouterr().err) == ("[WARNING] first\n", "[WARNING] second\n")
