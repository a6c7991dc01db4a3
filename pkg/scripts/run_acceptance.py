"""Run the acceptance criteria and print one pass/fail line per criterion.

    python scripts/run_acceptance.py

Exits non-zero if any criterion fails.  The same checks run under pytest
as tests/test_acceptance.py.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import test_acceptance  # noqa: E402


def main():
    failed = False
    for name in sorted(n for n in dir(test_acceptance) if n.startswith("test_criterion")):
        try:
            getattr(test_acceptance, name)()
        except AssertionError:
            failed = True
    for k in sorted(test_acceptance.RESULTS):
        print(test_acceptance.RESULTS[k])
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
