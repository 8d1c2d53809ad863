"""Direct convolution against the FFT route as the domain grows."""
from convfactor.bench import run_bench

report = run_bench("chain", length=4, sizes=(16, 64, 256, 1024), reps=3, seed=0)
print(report.table())
first, last = report.rows[0], report.rows[-1]
print(f"ratio grew by {last.ratio / first.ratio:.1f}x from A={first.A} to A={last.A}")
