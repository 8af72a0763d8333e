# depth_ruin/setup.py
"""
Workspace setup for the depth-ruin toolkit
"""

import importlib
import os
import sys

WORKSPACE_DIRS = ('config', 'logs', 'results')
REQUIRED_MODULES = ('numpy', 'scipy', 'mpmath', 'psutil')


def prepare_workspace():
    for name in WORKSPACE_DIRS:
        os.makedirs(name, exist_ok=True)
    print(f"Workspace directories ready: {', '.join(WORKSPACE_DIRS)}")


def missing_modules():
    """Names from REQUIRED_MODULES that fail to import"""
    missing = []
    for name in REQUIRED_MODULES:
        try:
            importlib.import_module(name)
        except ImportError:
            missing.append(name)
    return missing


def write_default_config(path: str = 'config/config.ini'):
    if os.path.exists(path):
        print(f"Keeping existing {path}")
        return
    from config.settings import Settings
    Settings(path).save(path)
    print(f"Wrote fully-defaulted configuration to {path}")


def smoke_check(path: str = 'config/config.ini'):
    """Build the configured model and print its scale function at 1"""
    from config.settings import Settings, build_run_config
    from processes.scale_engine import W, build_scale

    run = build_run_config(Settings(path))
    scale = build_scale(run.model, run.qs[0])
    print(f"{run.model.kind.value}: W^({run.qs[0]})(1) = {W(scale, 1.0):.10g}")


def main() -> int:
    print("Preparing the depth-ruin toolkit...")
    prepare_workspace()

    missing = missing_modules()
    if missing:
        print(f"Missing packages: {', '.join(missing)}")
        print("Run: pip install -r requirements.txt")
        return 1

    write_default_config()
    smoke_check()

    print("\nNext steps:")
    print("1. Edit config/config.ini (every key is documented in config/example.config.ini)")
    print("2. Run the quick tests: pytest tests/ -m 'not slow'")
    print("3. Compare formula and simulation: python main.py compare --out results/compare.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
