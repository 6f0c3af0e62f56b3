"""Drive the command line tool from Python and read its JSON report."""
import json
import subprocess
import sys


def paracurv(*args):
    return subprocess.run([sys.executable, "-m", "paracurv", *args], capture_output=True, text=True)


print(paracurv("conventions").stdout)

out = paracurv("run", "para_kenmotsu_alpha2", "--format", "json", "--seed", "7")
report = json.loads(out.stdout)
print("exit code     ", out.returncode)
print("classification", report["classification"])
print("tau           ", report["tau"]["mean"])
for t in report["theorems"]:
    print(f"  {t['theorem']:44s} {t['verdict']}")

# the same seed gives byte-identical output
again = paracurv("run", "para_kenmotsu_alpha2", "--format", "json", "--seed", "7")
print("deterministic:", again.stdout == out.stdout)
