"""Smoke test for the advfid extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml --release
Then run:                 python python/smoke_test.py
"""

import math
import os
import tempfile

import advfid

SIDE = 192


def scene(x, y, c):
    return int(120 + 60 * math.sin(0.11 * x + c) * math.cos(0.07 * y))


def make_image(noise_amp=0, channels=3):
    samples = bytearray()
    for y in range(SIDE):
        for x in range(SIDE):
            for c in range(channels):
                wobble = noise_amp * (((x * 31 + y * 17 + c * 7) % 11) - 5) / 5
                samples.append(max(0, min(255, round(scene(x, y, c) + wobble))))
    return advfid.Image(SIDE, SIDE, channels, bytes(samples))


def main():
    ref = make_image()
    weak, strong = make_image(4), make_image(30)
    assert (ref.width, ref.height, ref.channels) == (SIDE, SIDE, 3)

    names = advfid.metric_names()
    assert {"PSNR", "SSIM", "L0", "L2", "Linf"} <= set(names), names

    # Identical pairs hit each metric's perfect value.
    same = advfid.score_all(ref, ref)
    assert same["PSNR"] == math.inf and same["SSIM"] == 1.0 and same["L2"] == 0.0, same
    assert advfid.norms(ref, ref) == (0, 0.0, 0.0)

    # More noise scores worse.
    for metric in ("PSNR", "SSIM", "MS-SSIM", "UQI", "VIFp", "WSNR"):
        assert advfid.score(ref, weak, metric) > advfid.score(ref, strong, metric), metric
    l0, l2, linf = advfid.norms(ref, strong)
    assert l0 > 0 and 0 < l2 and 0 < linf <= 30 / 255 + 1e-12

    si, cf = advfid.descriptors(ref)
    assert si > 0 and cf is not None and cf > 0

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "ref.png")
        ref.save_png(path)
        back = advfid.Image.load(path)
        assert back.samples() == ref.samples()

    (m, ci), = advfid.mos([[5, 5, 4]])
    assert abs(m - 4.6667) < 1e-3
    (_, ci), = advfid.mos([[1, 2, 3, 4, 5]])
    assert abs(ci - 1.963) < 1e-3
    assert advfid.screen_outliers([[4] * 10] * 12) == []

    beta = [2.0, 1.0, 0.0, 0.5, 3.0]
    xs = [-4 + 8 * i / 49 for i in range(50)]
    ys = advfid.logistic(beta, xs)
    fitted, resid, _ = advfid.fit_logistic(xs, ys)
    assert resid < 1e-6, resid
    assert abs(advfid.plcc(advfid.logistic(fitted, xs), ys) - 1) < 1e-9
    assert advfid.srocc([math.exp(x) for x in xs], ys) == advfid.srocc(xs, ys)

    try:
        advfid.score(ref, make_image(channels=1), "PSNR")
    except ValueError as e:
        assert "shape" in str(e).lower() or "channel" in str(e).lower(), e
    else:
        raise AssertionError("mismatched shapes accepted")

    print(f"smoke test passed ({len(names)} metrics)")


if __name__ == "__main__":
    main()
