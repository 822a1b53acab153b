"""
How the three search strategies scale
=====================================

Runs the scaling sweep at desk-friendly sizes. The naive nested-loop
resolver grows quadratically because the registry keeps growing as new
faces stream in; the flat index does the same scan vectorized; IVFPQ probes
a few inverted lists per query and stays near-linear.

For the full-size sweep (up to 16k faces, a few minutes) use the CLI:

    facegraph bench --sizes 1000,2000,4000,8000,16000 --out bench_out --plot
"""

from facegraph.bench import (
    format_table,
    run_scaling_benchmark,
    slope_for,
    write_series_csv,
)

records = run_scaling_benchmark(
    sizes=[1000, 2000, 4000, 8000],
    progress=lambda r: print(f"  {r.backend:<6} {r.faces:>5} faces  {r.seconds:7.3f}s"),
)

print()
print(format_table(records))
print()
print(f"naive log-log slope: {slope_for(records, 'naive'):.2f}  (quadratic ~ 2)")
print(f"flat  log-log slope: {slope_for(records, 'flat'):.2f}")
print(f"ivfpq log-log slope: {slope_for(records, 'ivfpq'):.2f}  (near-linear)")

write_series_csv(records, "/tmp/demo_series.csv")
print("\nwrote /tmp/demo_series.csv (backend,faces,seconds,...)")
