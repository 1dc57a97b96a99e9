"""Writes the synthetic test frames and the small training-manifest tree."""
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
W, H, FOCAL = 320, 240, 300.0
BACKGROUND, BODY, FACE, FOREHEAD = 200, 60, 20, 230


def blank(w=W, h=H, v=BACKGROUND):
    return [[v] * w for _ in range(h)]


def fill(img, l, t, r, b, v):
    h, w = len(img), len(img[0])
    l, r = max(0, round(l)), min(w, round(r))
    t, b = max(0, round(t)), min(h, round(b))
    for y in range(t, b):
        for x in range(l, r):
            img[y][x] = v


def face(img, u, v, fw):
    fill(img, u - fw / 2, v - fw / 2, u + fw / 2, v + fw / 2, FACE)
    top = v - fw / 2
    fill(img, u - fw / 2, top + fw / 6, u + fw / 2, top + fw / 3, FOREHEAD)


def person(img, u, v, dist):
    k = FOCAL / dist
    fw = 0.16 * k
    top = v - 0.6 * fw
    fill(img, u - 0.25 * k, top, u + 0.25 * k, top + 0.75 * k, BODY)
    face(img, u, v, fw)


def write_pgm(path, img, binary=True):
    h, w = len(img), len(img[0])
    path.parent.mkdir(parents=True, exist_ok=True)
    if binary:
        path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + bytes(v for row in img for v in row))
    else:
        lines = ["P2", "# synthetic frame", f"{w} {h}", "255"]
        lines += [" ".join(str(v) for v in row) for row in img]
        path.write_text("\n".join(lines) + "\n")


def write_ppm(path, img):
    h, w = len(img), len(img[0])
    data = bytes(c for row in img for v in row for c in (v, v, v))
    path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + data)


def frames():
    out = ROOT / "frames"
    img = blank()
    person(img, 160, 120, 5.0)
    write_pgm(out / "person_center.pgm", img)
    write_ppm(out / "person_center.ppm", img)

    img = blank()
    person(img, 100, 90, 6.0)
    write_pgm(out / "person_offset.pgm", img, binary=False)

    img = blank()
    person(img, 80, 110, 4.0)
    person(img, 240, 120, 7.0)
    write_pgm(out / "two_people.pgm", img)

    # face pattern alone on the background: no body around it
    img = blank()
    face(img, 160, 120, 16)
    write_pgm(out / "face_without_body.pgm", img)

    write_pgm(out / "blank.pgm", blank())


def dataset():
    rng = random.Random(7)
    out = ROOT / "dataset"
    pos_lines = []
    for i in range(4):
        w, h = 64 + 8 * i, 48 + 4 * i
        img = [[rng.randrange(256) for _ in range(w)] for _ in range(h)]
        name = f"pos/img_{i}.pgm"
        write_pgm(out / name, img)
        n = 1 + i % 2
        rects = []
        for _ in range(n):
            rw, rh = rng.randint(20, 30), rng.randint(20, 30)
            rects += [rng.randint(0, w - rw), rng.randint(0, h - rh), rw, rh]
        pos_lines.append(" ".join([name, str(n)] + [str(v) for v in rects]))
    neg_lines = ["# background images"]
    for i in range(3):
        name = f"neg/bg_{i}.pgm"
        write_pgm(out / name, [[rng.randrange(256) for _ in range(40)] for _ in range(30)])
        neg_lines.append(name)
    write_pgm(out / "neg/tiny.pgm", [[rng.randrange(256) for _ in range(10)] for _ in range(10)])

    (out / "positives.dat").write_text("\n".join(pos_lines) + "\n")
    (out / "bg.txt").write_text("\n".join(neg_lines) + "\n")
    dirty_pos = pos_lines + ["pos/img_0.pgm 1 50 30 20 20", "pos/missing.pgm 1 0 0 20 20"]
    (out / "positives_dirty.dat").write_text("\n".join(dirty_pos) + "\n")
    (out / "bg_dirty.txt").write_text("\n".join(neg_lines + ["neg/tiny.pgm"]) + "\n")


if __name__ == "__main__":
    frames()
    dataset()
