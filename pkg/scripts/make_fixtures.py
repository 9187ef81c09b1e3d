"""Regenerate the hand-built fixtures under fixtures/.

The figure-eight and tilted files come from scripts/search_fixture.py and are
checked in as found; everything else is written here.
usage: python3 scripts/make_fixtures.py
"""
from pathlib import Path

from tanglefloer.moves import apply_script, parse_script
from tanglefloer.tangle import MarkedPoint, Point, emit_tangle, from_representatives

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def write(name, text):
    (OUT / name).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    print("wrote", name)


def henon_pair(surface="plane", marked=(), window=4):
    z = (0,) * {"plane": 0, "cylinder": 1, "torus": 2}[surface]
    reps = [Point("p", 0, 1.0, 1.0, 1, z, z, -1), Point("q", 0, 1.5, 0.75, -1, z, z, -2)]
    return from_representatives(reps, window=window, surface=surface, marked=marked)


def main():
    OUT.mkdir(exist_ok=True)
    write("henon_pair.tgl", emit_tangle(henon_pair()))

    marks = (
        MarkedPoint("y", 1, table=True),
        MarkedPoint("z0", 2, inside=((("p", 0), ("q", -1)),), table=True),
        MarkedPoint("z1", 2, inside=((("p", 1), ("q", 0)),), table=True),
    )
    write("chaos.tgl", emit_tangle(henon_pair(marked=marks, window=6)))

    pre = henon_pair("cylinder")
    write("badflip_pre.tgl", emit_tangle(pre))
    flip = "mv create u+s+ after_u=p.0 after_s=p.1 sign=+1 label=(1) names=s,r\n"
    write("badflip.mv", flip)
    write("badflip_post.tgl", emit_tangle(apply_script(pre, parse_script(flip))))

    mixed = "mv create u+s+ after_u=p.0 after_s=p.1 sign=-1 label=() names=s,r\n"
    write("mixed.mv", mixed)

    # a heart from p (grade 1) to r (grade -1) through the fixed point;
    # w is a secondary orbit that serves as the second cutting point
    reps = [Point("p", 0, 1.0, 1.0, 1, mu=1), Point("r", 0, 1.75, -1.0, -1, mu=-1),
            Point("w", 0, 1.5, 1.5, 1)]
    write("heart11.tgl", emit_tangle(from_representatives(reps, window=3)))

    reps = [Point("p", 0, 1.0, 1.0, 1, mu=-1), Point("q", 0, 1.5, 0.75, -1, mu=-2)]
    write("reversing.tgl", emit_tangle(from_representatives(reps, window=4, reversing=True)))

    write("single.tgl", emit_tangle(from_representatives([Point("p", 0, 1.0, 1.0, 1, mu=-1)], window=1)))
    write("empty.tgl", "surface plane\norientation preserving\nwindow 0\n")
    write("duplicate_tu.tgl", "surface plane\norientation preserving\nwindow 0\n"
          "pt a 0 1.0 1.0 +1 () ()\npt b 0 1.0 2.0 -1 () ()\n")


if __name__ == "__main__":
    main()
