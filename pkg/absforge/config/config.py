import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Name of the environment variable that holds the LLM API key.
# The key itself is never read from config files.
API_KEY_ENV = os.getenv("ABSFORGE_API_KEY_ENV", "ABSFORGE_API_KEY")

# Chat-completion endpoint and model for the LLM proposer
LLM_ENDPOINT = os.getenv("ABSFORGE_LLM_ENDPOINT")
LLM_MODEL = os.getenv("ABSFORGE_LLM_MODEL")
LLM_TIMEOUT = float(os.getenv("ABSFORGE_LLM_TIMEOUT", "120"))
LLM_MAX_RETRIES = int(os.getenv("ABSFORGE_LLM_MAX_RETRIES", "3"))
LLM_BACKOFF_BASE = float(os.getenv("ABSFORGE_LLM_BACKOFF_BASE", "1.0"))

# Conversation history budget (rough token estimate, chars / 4)
CONVERSATION_TOKEN_BUDGET = int(os.getenv("ABSFORGE_TOKEN_BUDGET", "100000"))

# Directory for run records
OUTPUT_DIR = Path(os.getenv("ABSFORGE_OUTPUT_DIR", "runs"))

# Search budgets
BFS_NODE_BUDGET = 10**6  # visited states for bounded goal reachability
SOLVER_NODE_BUDGET = 10**5  # QNP solver search nodes
SOLVER_TIME_LIMIT = 10.0  # seconds
TREE_NODE_BUDGET = 200_000  # refined tree / policy refinement nodes
EXECUTION_STEP_BOUND = 1000  # LL steps when refining a policy on one instance

# Debug loop
MAX_DEBUG_ITERATIONS = 10
DEFAULT_TRAINING_SPLIT = "2:2"
