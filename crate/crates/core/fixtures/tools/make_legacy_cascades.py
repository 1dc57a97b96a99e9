"""Writes the two legacy-format cascade fixtures (20x20 and 24x24 base).

Deterministic: the same seed always yields byte-identical files.
Layout follows the XML emitted by opencv_traincascade with BASIC HAAR features.
"""
import random
import sys
from pathlib import Path

TEMPLATES = [(2, 1), (1, 2), (3, 1), (1, 3), (2, 2)]


def random_feature(rng, w, h):
    cw, ch = rng.choice(TEMPLATES)
    sw = rng.randint(1, w // cw)
    sh = rng.randint(1, h // ch)
    x = rng.randint(0, w - cw * sw)
    y = rng.randint(0, h - ch * sh)
    whole = (x, y, cw * sw, ch * sh, -1.0)
    if (cw, ch) == (2, 1):
        return [whole, (x + sw, y, sw, sh, 2.0)]
    if (cw, ch) == (1, 2):
        return [whole, (x, y + sh, sw, sh, 2.0)]
    if (cw, ch) == (3, 1):
        return [whole, (x + sw, y, sw, sh, 3.0)]
    if (cw, ch) == (1, 3):
        return [whole, (x, y + sh, sw, sh, 3.0)]
    return [whole, (x + sw, y, sw, sh, 2.0), (x, y + sh, sw, sh, 2.0)]


def fmt(v):
    return "%.16e" % v


def cascade_xml(rng, w, h, weak_counts):
    features = []
    stages = []
    for n in weak_counts:
        weak = []
        for _ in range(n):
            idx = len(features)
            features.append(random_feature(rng, w, h))
            thr = rng.uniform(-0.08, 0.08)
            left, right = rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)
            weak.append((idx, thr, left, right))
        stage_thr = -0.35 * n + rng.uniform(-0.2, 0.2)
        stages.append((stage_thr, weak))

    out = ['<?xml version="1.0"?>', "<opencv_storage>", "<cascade>"]
    out += [
        "  <stageType>BOOST</stageType>",
        "  <featureType>HAAR</featureType>",
        f"  <height>{h}</height>",
        f"  <width>{w}</width>",
        "  <stageParams>",
        "    <boostType>GAB</boostType>",
        "    <minHitRate>9.9500000476837158e-01</minHitRate>",
        "    <maxFalseAlarm>5.0000000000000000e-01</maxFalseAlarm>",
        "    <weightTrimRate>9.4999999999999996e-01</weightTrimRate>",
        "    <maxDepth>1</maxDepth>",
        "    <maxWeakCount>100</maxWeakCount></stageParams>",
        "  <featureParams>",
        "    <maxCatCount>0</maxCatCount>",
        "    <featSize>1</featSize>",
        "    <mode>BASIC</mode></featureParams>",
        f"  <stageNum>{len(stages)}</stageNum>",
        "  <stages>",
    ]
    for s, (thr, weak) in enumerate(stages):
        out.append(f"    <!-- stage {s} -->")
        out.append("    <_>")
        out.append(f"      <maxWeakCount>{len(weak)}</maxWeakCount>")
        out.append(f"      <stageThreshold>{fmt(thr)}</stageThreshold>")
        out.append("      <weakClassifiers>")
        for idx, t, left, right in weak:
            out.append("        <_>")
            out.append("          <internalNodes>")
            out.append(f"            0 -1 {idx} {fmt(t)}</internalNodes>")
            out.append("          <leafValues>")
            out.append(f"            {fmt(left)} {fmt(right)}</leafValues></_>")
        out[-1] = out[-1] + "</weakClassifiers></_>"
    out.append("    </stages>")
    out.append("  <features>")
    for parts in features:
        out.append("    <_>")
        out.append("      <rects>")
        for x, y, rw, rh, wt in parts:
            out.append("        <_>")
            out.append(f"          {x} {y} {rw} {rh} {wt:.1f}</_>")
        out[-1] = out[-1] + "</rects></_>"
    out.append("  </features>")
    out.append("</cascade>")
    out.append("</opencv_storage>")
    return "\n".join(out) + "\n"


def main(dest):
    dest = Path(dest)
    rng = random.Random(20180424)
    small = cascade_xml(rng, 20, 20, [3, 4, 5, 6, 7, 8, 9, 10, 11, 12])
    large = cascade_xml(rng, 24, 24, [2, 5, 8, 10, 13, 16])
    (dest / "legacy_20x20.xml").write_text(small)
    (dest / "legacy_24x24.xml").write_text(large)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "cascades")
