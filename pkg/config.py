# ./fcl/config.py

import os
import logging
from dotenv import load_dotenv

load_dotenv()

# --- Exploration Budgets ---
STATE_BUDGET = int(os.getenv('FCL_BUDGET', '100000')) # Max states in any explored graph
DEFAULT_MAX_LEN = int(os.getenv('FCL_MAX_LEN', '8')) # Word bound for bounded checks
MAX_LASSOS = 64 # Cap on lassos returned by one enumeration
MAX_TERM_DEPTH = 64 # Nesting bound on the states of a global type transition system

# --- Global Types ---
DEFAULT_MODE = 'standard' # Projection mode used when --mode is not given

# --- Output ---
JSON_INDENT = 2
DOT_RANKDIR = 'LR'

# --- Logging ---
LOG_LEVEL = logging.getLevelName(os.getenv('FCL_LOG_LEVEL', 'WARNING').upper())
