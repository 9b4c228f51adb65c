"""The Galilei algebra in three representations: phase-space functions, van Hove operators, ensemble functionals.

Run: python demos/galilei_table.py
"""

from collections import defaultdict

from hybridmech import runner

recs = runner.galilei_records(M=1.0, times=(0.0, 0.5))
table = defaultdict(lambda: [0, 0, 0.0])
for r in recs:
    row = table[(r["representation"], str(r["t"]))]
    row[0] += 1
    row[1] += r["passed"]
    if r["residual"] is not None:
        row[2] = max(row[2], abs(r["residual"]))
print("representation   t         passed   max residual")
for (rep, t), (n, ok, res) in sorted(table.items()):
    print(f"{rep:15s}  {t:8s}  {ok:3d}/{n:<3d}  {res:.1e}")
some = [r for r in recs if r["representation"] == "phase" and r["t"] == 0.0][:6]
for r in some:
    print(f"  {r['symbols']:12s} = {r['got']}")
