#!/usr/bin/env python3
"""Writes wti_synthetic_2014.csv: SYNTHETIC settlement prices, not market data.

Two futures prices driven by the two-factor model with the parameters in
default.cfg, one path, business days 2014-03-03 .. 2014-06-13, seed 2014.
Maturities 2014-06-20 and 2014-07-22. Rounded to cents like exchange settlements.
"""
import datetime as dt
import math
import pathlib

import numpy as np

MU, KAPPA, ALPHA, ETA, ETA_BAR, RHO, LAM, R = 0.01, 0.8, 0.0, 0.45, 0.5, 0.75, 0.05, 0.001
START, END = dt.date(2014, 3, 3), dt.date(2014, 6, 13)
T1, T2 = dt.date(2014, 6, 20), dt.date(2014, 7, 22)


def coeffs(tau):
    at = ALPHA - LAM / KAPPA
    b = -(1 - math.exp(-KAPPA * tau)) / KAPPA
    a = ((R - at + ETA_BAR**2 / (2 * KAPPA**2) - ETA * ETA_BAR * RHO / KAPPA) * tau
         + ETA_BAR**2 / 4 * (1 - math.exp(-2 * KAPPA * tau)) / KAPPA**3
         + (at * KAPPA + ETA * ETA_BAR * RHO - ETA_BAR**2 / KAPPA) * (1 - math.exp(-KAPPA * tau)) / KAPPA**2)
    return a, b


def main():
    rng = np.random.default_rng(2014)
    days = [START + dt.timedelta(d) for d in range((END - START).days + 1)]
    days = [d for d in days if d.weekday() < 5]
    x, delta = math.log(101.0), 0.04
    rows = []
    prev = START
    for day in days:
        h = (day - prev).days / 365.0
        if h > 0:
            z1, z2 = rng.standard_normal(2)
            dz_s = z1
            dz_d = RHO * z1 + math.sqrt(1 - RHO**2) * z2
            x += (MU - ETA**2 / 2 - delta) * h + ETA * math.sqrt(h) * dz_s
            delta += KAPPA * (ALPHA - delta) * h + ETA_BAR * math.sqrt(h) * dz_d
        prev = day
        f = []
        for mat in (T1, T2):
            a, b = coeffs((mat - day).days / 365.0)
            f.append(math.exp(x + a + b * delta))
        rows.append(f"{day.isoformat()},{f[0]:.2f},{f[1]:.2f}")
    out = pathlib.Path(__file__).with_name("wti_synthetic_2014.csv")
    out.write_text("date,F1,F2\n" + "\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
