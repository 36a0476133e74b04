import glob
import os
import random

import pytest

from svgatom.atomize import Arc, AtomicPath, AtomicSVG, Close, Cubic, Line, Move

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "corpus")


@pytest.fixture(scope="session")
def corpus_files():
    files = sorted(glob.glob(os.path.join(CORPUS_DIR, "*.svg")))
    assert len(files) >= 20
    return files


def random_atomic_svg(rng: random.Random) -> AtomicSVG:
    """A random valid AtomicSVG: grid coords, grid colors, sane arcs."""
    paths = []
    for _ in range(rng.randint(1, 4)):
        fill = tuple(rng.randrange(16) * 17 for _ in range(3))
        cmds = []
        for _ in range(rng.randint(1, 3)):  # subpaths
            cmds.append(Move(_pt(rng)))
            for _ in range(rng.randint(1, 6)):
                kind = rng.choice("LLCCA")
                if kind == "L":
                    cmds.append(Line(_pt(rng)))
                elif kind == "C":
                    cmds.append(Cubic(_pt(rng), _pt(rng), _pt(rng)))
                else:
                    cmds.append(Arc(rng.randint(1, 199), rng.randint(1, 199),
                                    rng.randrange(360), rng.random() < 0.5,
                                    rng.random() < 0.5, _pt(rng)))
            if rng.random() < 0.7:
                cmds.append(Close())
        rule = "evenodd" if rng.random() < 0.3 else "nonzero"
        paths.append(AtomicPath(fill=fill, commands=cmds, fill_rule=rule))
    return AtomicSVG(paths=paths)


def _pt(rng):
    return (rng.randrange(200), rng.randrange(200))
