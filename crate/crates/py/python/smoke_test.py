"""Smoke test for the bwsched extension module.

Build and install first, e.g. `maturin develop` or
`pip install --no-build-isolation crates/py`, then run this file.
"""

import json
import math

import bwsched

TABLE1 = json.dumps(
    {
        "period_hours": 168,
        "origin": "Mon 00:00",
        "concurrency_limit": 10,
        "jobs": [
            {"client": "client 1", "start": "Mon 13:00", "end": "Mon 17:00"},
            {"client": "client 1", "start": "Wed 15:00", "end": "Wed 18:00"},
            {"client": "client 2", "start": "Sun 23:00", "end": "Mon 00:30"},
        ],
    }
)


def main():
    s = bwsched.Schedule.from_json(TABLE1)
    assert len(s) == 3
    assert s.centers() == [15.0, 64.5, 167.75]
    assert s.count_active(0.0) == 1
    assert s.max_concurrency()[0] == 1
    assert s.windows()[2]["start"] == "Sun 23:00"

    assert bwsched.silverman_bandwidth([10.0]) == 7.0
    f = bwsched.periodic_kde(s, bandwidth="fixed:6")
    assert len(f) == 2016
    assert abs(f.integral() - 1.0) < 1e-9
    assert abs(f.evaluate(0.0) - f.evaluate(168.0 - 1e-9)) < 0.01 * max(f.values)

    assert bwsched.validate_spacing([0.0, 10.0], 12.0) == [(0.0, 10.0, 10.0)]

    parsed = bwsched.parse_intent(
        "I need to backup VM16as_v1 3 times but try to schedule them when no other "
        "backups are happening, and not more frequently than once every 40 hours.",
        alpha_table="paper",
    )
    params = parsed["params"]
    assert (params["k"], params["epsilon"], params["alpha"]) == (3, 40.0, 0.2)
    assert bwsched.parse_intent(bwsched.render_intent(params))["params"] == params

    out = bwsched.greedy_sample(s, params, seed=7)
    assert len(out["centers"]) == 3
    assert out["rng"] == bwsched.RNG
    assert bwsched.validate_spacing(out["centers"], 40.0) == []
    assert out == bwsched.greedy_sample(s, params, seed=7)

    try:
        bwsched.greedy_sample(s, {"k": 20, "epsilon": 12.0})
    except bwsched.IllPosedError as e:
        assert "240" in str(e)
    else:
        raise AssertionError("expected IllPosedError")

    empty = bwsched.Schedule.from_json('{"jobs": []}')
    try:
        bwsched.greedy_sample(empty, {"k": 8, "epsilon": 1.0, "daily_cap": {"cap": 1}})
    except bwsched.SupportExhaustedError as e:
        assert "Unable to proceed" in str(e)
    else:
        raise AssertionError("expected SupportExhaustedError")

    assert math.isfinite(f.bandwidth)
    print("smoke test ok:", [round(c, 3) for c in out["centers"]])


if __name__ == "__main__":
    main()
