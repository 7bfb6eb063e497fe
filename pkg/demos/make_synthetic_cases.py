"""
Write a SYNTHETIC daily-case file for trying out `fracovid fit`.

Daily counts are the model observable (I + P + H)/s for alpha = 0.97,
s = 15 under the shipped contact-reduction schedule, perturbed by seeded 3%
log-normal noise.  It is not real surveillance data.  A week of lead-in
before the fit window repeats the first model value.

    python3 demos/make_synthetic_cases.py [output.csv]
"""

import datetime as dt
import sys
from pathlib import Path

import numpy as np

from fracovid.config import default_config_path, load_config
from fracovid.fitting import predicted_observable, simulate_window

ALPHA, S, NOISE, SEED, LEAD_IN = 0.97, 15.0, 0.03, 20201227, 7

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data" / "synthetic_cases.csv"

fc = load_config(default_config_path()).fit_config()
daily = predicted_observable(simulate_window(ALPHA, fc), S)
daily = np.concatenate([np.full(LEAD_IN, daily[0]), daily])

rng = np.random.default_rng(SEED)
daily = np.round(daily * rng.lognormal(0.0, NOISE, len(daily)))

out.parent.mkdir(parents=True, exist_ok=True)
with open(out, "w") as fh:
    fh.write("date,confirmed_daily\n")
    for k, n in enumerate(daily):
        day = fc.start + dt.timedelta(days=k - LEAD_IN)
        fh.write(f"{day.isoformat()},{int(n)}\n")
print(f"wrote {len(daily)} days of synthetic cases (alpha={ALPHA}, s={S}) to {out}")
