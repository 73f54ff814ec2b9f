import os

from dotenv import load_dotenv

load_dotenv()

# -----------------------------
# Engine defaults (overridable from the environment or the CLI)
# -----------------------------
DEFAULT_DEPTH = int(os.getenv("TCCP_DEPTH", "8"))
DEFAULT_DOMAIN = os.getenv("TCCP_DOMAIN", "identity")
# Instants the depth-k domain keeps of every behaviour
DEPTH_K = int(os.getenv("TCCP_DEPTH_K", "3"))

# Saturation keeps shrinking intervals through arithmetic links; cycles stop here
SATURATION_ROUNDS = 32

# -----------------------------
# Output
# -----------------------------
LOG_LEVEL = os.getenv("TCCP_LOG_LEVEL", "WARNING")
NO_COLOR = bool(os.getenv("NO_COLOR") or os.getenv("TCCP_NO_COLOR"))
SCHEMA_VERSION = "1"
