"""Writes rts24.json: RTS-24 network data with synthesized 7-day profiles."""
import json
import math
from pathlib import Path

BRANCHES = [
    (1, 2, 0.0026, 0.0139, 175), (1, 3, 0.0546, 0.2112, 175), (1, 5, 0.0218, 0.0845, 175),
    (2, 4, 0.0328, 0.1267, 175), (2, 6, 0.0497, 0.192, 175), (3, 9, 0.0308, 0.119, 175),
    (3, 24, 0.0023, 0.0839, 400), (4, 9, 0.0268, 0.1037, 175), (5, 10, 0.0228, 0.0883, 175),
    (6, 10, 0.0139, 0.0605, 175), (7, 8, 0.0159, 0.0614, 175), (8, 9, 0.0427, 0.1651, 175),
    (8, 10, 0.0427, 0.1651, 175), (9, 11, 0.0023, 0.0839, 400), (9, 12, 0.0023, 0.0839, 400),
    (10, 11, 0.0023, 0.0839, 400), (10, 12, 0.0023, 0.0839, 400), (11, 13, 0.0061, 0.0476, 500),
    (11, 14, 0.0054, 0.0418, 500), (12, 13, 0.0061, 0.0476, 500), (12, 23, 0.0124, 0.0966, 500),
    (13, 23, 0.0111, 0.0865, 500), (14, 16, 0.005, 0.0389, 500), (15, 16, 0.0022, 0.0173, 500),
    (15, 21, 0.0063, 0.049, 500), (15, 21, 0.0063, 0.049, 500), (15, 24, 0.0067, 0.0519, 500),
    (16, 17, 0.0033, 0.0259, 500), (16, 19, 0.003, 0.0231, 500), (17, 18, 0.0018, 0.0144, 500),
    (17, 22, 0.0135, 0.1053, 500), (18, 21, 0.0033, 0.0259, 500), (18, 21, 0.0033, 0.0259, 500),
    (19, 20, 0.0051, 0.0396, 500), (19, 20, 0.0051, 0.0396, 500), (20, 23, 0.0028, 0.0216, 500),
    (20, 23, 0.0028, 0.0216, 500), (21, 22, 0.0087, 0.0678, 500),
]

# bus: (P MW, Q MVAr)
LOADS = {
    1: (108, 22), 2: (97, 20), 3: (180, 37), 4: (74, 15), 5: (71, 14), 6: (136, 28),
    7: (125, 25), 8: (171, 35), 9: (175, 36), 10: (195, 40), 13: (265, 54), 14: (194, 39),
    15: (317, 64), 16: (100, 20), 18: (333, 68), 19: (181, 37), 20: (128, 26),
}

# bus, cost, startup, p_min, p_max, ramp, initially on
UNITS = [
    (1, 16.5, 1500, 60, 152, 60, True),
    (2, 16.5, 1500, 60, 152, 60, True),
    (7, 43.7, 2000, 75, 300, 120, False),
    (13, 38.0, 3500, 207, 591, 180, False),
    (15, 14.0, 1200, 54, 155, 60, True),
    (16, 14.0, 1200, 54, 155, 60, True),
    (18, 5.5, 40000, 100, 400, 80, True),
    (21, 5.5, 40000, 100, 400, 80, True),
    (23, 14.2, 2400, 108, 310, 120, True),
    (23, 12.5, 4000, 140, 350, 100, True),
    (1, 55.0, 100, 16, 80, 80, False),
]

DAILY = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
         0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63]
DAY_FACTOR = [1.00, 0.98, 0.96, 0.99, 0.97, 0.85, 0.82]
CLOUD = [1.00, 0.80, 0.90, 0.60, 1.00, 0.95, 0.70]
PEAK_SCALE = 0.9
T = 24


def r2(v):
    return round(v, 3)


def load_profile(p):
    return [r2(p * PEAK_SCALE * DAY_FACTOR[d] * DAILY[t]) for d in range(7) for t in range(T)]


def pv_profile(cap):
    return [r2(cap * CLOUD[d] * max(0.0, math.sin(math.pi * (t - 6) / 12))) for d in range(7) for t in range(T)]


def wind_profile(cap, phase):
    out = []
    for d in range(7):
        for t in range(T):
            x = 0.45 + 0.25 * math.sin(2 * math.pi * (t + 5 * d + phase) / 24) + 0.1 * math.cos(2 * math.pi * d / 7)
            out.append(r2(cap * min(1.0, max(0.0, x))))
    return out


def main():
    doc = {
        "meta": {"name": "rts24", "periods": T, "base_mva": 100.0},
        "buses": [{"id": b, "voltage_min": 0.95, "voltage_max": 1.05} for b in range(1, 25)],
        "branches": [{"from": f, "to": t, "r": r, "x": x, "flow_limit": float(lim)} for f, t, r, x, lim in BRANCHES],
        "units": [
            {"bus": b, "cost": c, "startup_cost": float(su), "p_min": float(lo), "p_max": float(hi),
             "ramp_up": float(rmp), "ramp_down": float(-rmp), "initial_status": on, "power_factor": 0.95}
            for b, c, su, lo, hi, rmp, on in UNITS
        ],
        "vpps": [{"bus": b, "p_max": 30.0, "cost": 60.0} for b in (3, 5, 6, 8, 9, 14, 17, 20)],
        "renewables": [
            {"bus": 1, "kind": "pv", "forecast_profile": pv_profile(100.0)},
            {"bus": 22, "kind": "pv", "forecast_profile": pv_profile(100.0)},
            {"bus": 2, "kind": "wind", "forecast_profile": wind_profile(150.0, 0)},
            {"bus": 23, "kind": "wind", "forecast_profile": wind_profile(150.0, 7)},
        ],
        "loads": [
            {"bus": b, "forecast_profile": load_profile(p), "power_factor": round(p / math.hypot(p, q), 4)}
            for b, (p, q) in sorted(LOADS.items())
        ],
        "costs": {"c_ls": 1000.0, "lambda_v": 10000.0, "lambda_b": 10000.0},
    }
    out = Path(__file__).resolve().parent.parent / "rts24.json"
    out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
