from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SAMPLE = ROOT / "tests" / "data" / "ro_sample.txt"
OUT = ROOT / "build" / "demos"
OUT.mkdir(parents=True, exist_ok=True)


def sample_lines():
    return SAMPLE.read_text(encoding="utf-8").splitlines()
