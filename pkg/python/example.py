import pathlib

import tempoca


tempoca.set_logger_level(tempoca.LoggerLevel.error)

# A fork: X0 drives X1 at lag 1 and X2 at lag 2 through quadratic couplings
spec = tempoca.StructureSpec("fork", n=2000, seed=7)
panel, truth = tempoca.generate(spec)
print(f"panel: n={panel.n}, series={panel.names}")

report = tempoca.empirical_stationarity_check(panel)
print(f"possibly non-stationary: {report.flagged}")

graph = tempoca.discover(panel, tempoca.DiscoveryParams(tau_max=3))
print(graph)
for record in graph.audit:
    print(f"R({record.source} -> {record.target} | {list(record.cond_set)}) = "
          f"{record.r:.3f}{' removed' if record.removed else ''}")

baseline = tempoca.pwgc(panel)
for name, estimate in (("pc_pmime", graph), ("pwgc", baseline)):
    score = tempoca.f1_score(estimate, truth)
    print(f"{name}: precision={score.precision:.2f} recall={score.recall:.2f} "
          f"f1={score.f1:.2f}")

output_path = pathlib.Path(__file__).parent / "output"
tempoca.write_graph(graph, output_path / "graph.json")
tempoca.write_audit(graph.audit, output_path / "audit.csv")
