"""
Running a benchmark group and reading the tables
================================================
"""

import tempfile
from pathlib import Path

from opacity_lab.harness import RunConfig, load_results, run

out = Path(tempfile.mkdtemp())
results = run(RunConfig(benchmark=1, groups=(1,), ks=(0, None), repeats=1, out=out))
for r in results:
    print(r.case_id, r.rg_nodes, r.brg_nodes, r.ebrg_nodes, r.a3_violators)

print(sorted(p.name for p in out.iterdir()))
print((out / "report.md").read_text()[:600])

# the CSVs load back
assert [r.case_id for r in load_results(out)] == [r.case_id for r in results]
