import os
from pathlib import Path

# Shared fixture builders live in tests/fixtures
pytest_plugins = ['tests.fixtures.field_fixtures']

# builder modules, not test files
_IGNORED = {
    str(Path('tests') / 'fixtures'),
}


def pytest_ignore_collect(collection_path, config):
    try:
        rel = os.path.relpath(str(collection_path))
    except Exception:
        rel = str(collection_path)
    if rel in _IGNORED:
        return True
    return None
