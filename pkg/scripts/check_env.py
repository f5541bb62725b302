"""Check the runtime environment for the numeric stack mbikit needs.

Exits with non-zero status if a required package is missing or the package
itself fails to import.

Usage:
  .venv/bin/python scripts/check_env.py
"""
import importlib
import os
import sys

REQUIRED_IMPORTS = {
    "numpy": "numpy (tensor algebra, grid fields)",
    "scipy": "scipy (shell interpolation, decay fits)",
    "pandas": "pandas (diagnostic CSV)",
    "tqdm": "tqdm (solver progress)",
    "joblib": "joblib (slab-parallel grid kernels)",
    "jsonschema": "jsonschema (run configuration validation)",
    "pytest": "pytest (tests)",
}

MISSING = []

print("Checking Python imports...")
for mod, desc in REQUIRED_IMPORTS.items():
    try:
        module = importlib.import_module(mod)
        version = getattr(module, "__version__", "?")
        print(f"✓ {desc} (imported {mod} {version})")
    except Exception:
        print(f"✗ Missing: {desc} (cannot import {mod})")
        MISSING.append((mod, desc))

print("\nChecking the mbikit package...")
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
try:
    importlib.import_module("mbikit.cli_runner")
    print("✓ mbikit imports")
except Exception as e:
    print(f"✗ mbikit failed to import: {e}")
    MISSING.append(("mbikit", f"mbikit package ({e})"))

print("\nEnvironment settings:")
for var in ("MBIKIT_WORKERS", "MBIKIT_LOG_LEVEL", "MBIKIT_PROGRESS"):
    print(f"  {var}={os.environ.get(var, '<default>')}")

if MISSING:
    print("\nOne or more REQUIRED dependencies are missing. Install them and re-run this check.")
    for m in MISSING:
        print(f" - {m[1]}")
    sys.exit(2)

print("\nEnvironment looks good: all required packages are present.")
sys.exit(0)
