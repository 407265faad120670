"""Show each branch of the local-patch selection rule on hand-built masks.

Three situations: a fresh session (no previous mask), a tiny disagreement
(the click square fires), and a large disagreement (the component's own
bounding box wins).  Prints the chosen rectangle for each, with and without
expansion.
"""

import numpy as np

from clore.pipeline import select_local_patch
from clore.raster import Rect


def show(title, m_c, m_p, click, gamma=1.0):
    r_g = Rect(0, m_c.shape[0], 0, m_c.shape[1])
    patch = select_local_patch(m_c, m_p, r_g, click, gamma)
    print(f"{title:46s} gamma={gamma:<4} -> {patch.as_tuple()}")
    return patch


def main():
    size = 48

    print("branch 1: empty previous mask -> coarse bounding box")
    m_c = np.zeros((size, size), bool)
    m_c[8:20, 10:26] = True
    m_p = np.zeros((size, size), bool)
    show("  coarse blob [8,20)x[10,26), click (12,12)", m_c, m_p, (12, 12))
    show("  same with surrounding context", m_c, m_p, (12, 12), gamma=1.4)

    print("\nbranch 2: small disagreement -> 0.4*l square at the click")
    m_c = np.zeros((size, size), bool)
    m_c[4:40, 4:40] = True                 # coarse box 36x36, area 1296
    m_p = m_c.copy()
    m_p[20:24, 20:24] = False              # 4x4 hole, area 16 << 1/3
    show("  4x4 hole in a 36x36 object, click (21,21)", m_c, m_p, (21, 21))

    print("\nbranch 3: large disagreement -> its own bounding box")
    m_p = m_c.copy()
    m_p[4:40, 4:22] = False                # half the object flipped
    show("  36x18 flip in a 36x36 object, click (10,10)", m_c, m_p, (10, 10))

    print("\nglobal constraints always clip the result:")
    m_p = np.zeros((size, size), bool)
    r_g = Rect(0, 24, 0, 24)
    patch = select_local_patch(m_c, m_p, r_g, (12, 12), 1.4)
    print(f"  constraint (0,24,0,24)                        -> {patch.as_tuple()}")


if __name__ == "__main__":
    main()
