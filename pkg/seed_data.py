import json
import sys
from pathlib import Path

from openbook.core.oracles import parity_scan

FIXTURE = Path(__file__).parent / "fixtures" / "hemisphere_parity.json"


def seed_parity(l_max: int = 6) -> dict:
    counts = parity_scan(l_max)
    return {
        "l_max": l_max,
        "dirichlet": {str(l): n for l, n in sorted(counts["dirichlet"].items())},
        "neumann": {str(l): n for l, n in sorted(counts["neumann"].items())},
    }


if __name__ == "__main__":
    l_max = int(sys.argv[1]) if len(sys.argv) > 1 else 6
    FIXTURE.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE.write_text(json.dumps(seed_parity(l_max), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {FIXTURE}")
