"""Run every demo config through the CLI; outputs land in demos/out/<name>/."""
import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(HERE, "configs")
# resolve_mixed.json is a refusal demo: it exits with the region-error code 4
EXPECTED = {"resolve_mixed": 4}


def main():
    failed = 0
    os.makedirs(os.path.join(HERE, "out"), exist_ok=True)
    pp = os.path.join(HERE, "out", "phase_points.csv")
    runs = [("phase_points", ["phase-points", "--xi-hat", "1.0", "--out", pp])]
    for name in sorted(os.listdir(CONFIGS)):
        stem = name[:-5]
        command = stem.split("_")[0].replace("zm", "zm-check")
        runs.append((stem, [command, os.path.join(CONFIGS, name),
                            "--out-dir", os.path.join(HERE, "out", stem)]))
    for stem, args in runs:
        res = subprocess.run([sys.executable, "-m", "dpsoliton", *args],
                             capture_output=True, text=True)
        ok = res.returncode == EXPECTED.get(stem, 0)
        failed += not ok
        print(f"{'ok ' if ok else 'BAD'} {stem:18s} exit {res.returncode}  {' '.join(res.stdout.split())[:90]}")
        if not ok:
            print(res.stderr, file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
