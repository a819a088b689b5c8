"""Small comparison-count sweep of incremental clustering against the distance baseline."""

import sys

from stc.bench import GenConfig, bench, write_bench_csv

cfg = GenConfig(rng_seed=0)
records = bench([50, 150, 250, 350], cfg, baseline_max=250)
sys.stdout.write(write_bench_csv(records))
