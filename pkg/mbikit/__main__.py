"""Module entrypoint for `python -m mbikit`.

A thin wrapper over `mbikit.cli_runner`; the default log level comes from
``MBIKIT_LOG_LEVEL``.
"""
from __future__ import annotations

from .cli_runner import run


if __name__ == '__main__':
    run()
