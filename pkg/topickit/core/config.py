import os
from dotenv import load_dotenv

load_dotenv()

REGISTRY_PATH = os.getenv("TOPICKIT_REGISTRY", "registry.json")
LOG_LEVEL = os.getenv("TOPICKIT_LOG_LEVEL", "WARNING")
DEFAULT_JOBS = int(os.getenv("TOPICKIT_JOBS", "1"))
MAX_CONCAT_LANGS = int(os.getenv("TOPICKIT_MAX_CONCAT_LANGS", "3"))
API_HOST = os.getenv("TOPICKIT_HOST", "0.0.0.0")
API_PORT = int(os.getenv("PORT", "8000"))

SNIPPET_CAP = 30
DEFAULT_MAX_GAP = 80
MAX_GAP = 1000
DEFAULT_MAX_LINE_WIDTH = 100
MIN_LINE_WIDTH = 20

INERT = "(?!x)x"
ABLATION_LITERAL = "foobar123"

DEFAULT_PREFIX_GUARD = r"(\b|\d|_|#)"
DEFAULT_SUFFIX_GUARD = r"(\b|\d|_)"

# Constructs that PHP, SQL and Python engines disagree on.
DEFAULT_BANLIST = [
    r"\(\?<[=!]",
    r"[*+?}]\+",
    r"\(\?(R|[0-9]|[+-][0-9]|&|P>)",
    r"\(\?[aiLmsux-]+[:)]",
]

MIN_BENCH_REPS = 3


def get_registry_path() -> str:
    return os.getenv("TOPICKIT_REGISTRY", REGISTRY_PATH)
