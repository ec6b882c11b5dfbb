from pathlib import Path
import os

try:
    from dotenv import load_dotenv
except Exception:
    load_dotenv = None

if load_dotenv:
    # Load .env once at import for local/dev runs.
    load_dotenv()

ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = ROOT / "config"
SCENES_DIR = CONFIG_DIR / "scenes"
OUTPUT_DIR = ROOT / "output"
LOGS_DIR = ROOT / "logs"
RUN_LOG_PATH = LOGS_DIR / "runs.jsonl"


def get_presets_path():
    return Path(os.getenv("TILETENSOR_PRESETS_PATH", str(CONFIG_DIR / "tiles.yaml")))


def get_run_log_path():
    return Path(os.getenv("TILETENSOR_RUN_LOG_PATH", str(RUN_LOG_PATH)))


def get_quad_rel_tol():
    return float(os.getenv("TILETENSOR_QUAD_REL_TOL", "1e-10"))


def get_quad_abs_tol():
    return float(os.getenv("TILETENSOR_QUAD_ABS_TOL", "1e-13"))


def get_quad_max_subdivisions():
    return int(os.getenv("TILETENSOR_QUAD_MAX_SUBDIVISIONS", "200"))


def get_oracle_rel_tol():
    return float(os.getenv("TILETENSOR_ORACLE_REL_TOL", "1e-8"))


def get_verify_tol():
    return float(os.getenv("TILETENSOR_VERIFY_TOL", "1e-6"))


def get_workers():
    value = os.getenv("TILETENSOR_WORKERS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1
