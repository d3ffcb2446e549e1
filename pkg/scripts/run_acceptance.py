"""Print one PASS/FAIL line per acceptance criterion (same checks as the pytest suite)."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import test_acceptance  # noqa: E402

if __name__ == "__main__":
    wanted = [int(a) for a in sys.argv[1:]] or [c[0] for c in test_acceptance.CRITERIA]
    results = [test_acceptance.run_criterion(n) for n in wanted]
    for _, line in results:
        print(line, flush=True)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
