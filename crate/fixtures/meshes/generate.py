"""Regenerate the benchmark mesh fixtures with the gmsh Python API.

Usage: python3 generate.py [--out DIR]

Each geometry is written twice, as ASCII MSH 2.2 and ASCII MSH 4.1, so the
parser can be checked for cross-version equivalence.  Mesh sizing follows
the rule "largest element side in the crack region below l_s / 2": hf =
l_s / 2.1 at the notch and load points and, for the symmetric beam, a finer
box over the central band |x - L/2| <= CW.
"""

import argparse
import math
import os

import gmsh


def symmetric_tpb(ls):
    """Notched beam under symmetric three point bending (lengths in mm)."""
    geo = gmsh.model.geo
    L = 8.0
    LL = 0.475 * L
    LR = 0.525 * L
    H = 2.0
    CH = 0.4
    CW = 0.2
    hfc = ls / 100
    hf = ls / 2.1
    h = 100 * hf
    # gmsh edges overshoot the target size by up to ~30%, so the central box
    # is meshed finer than hf and extends past CW to keep every edge with
    # |x - L/2| <= CW below ls / 2.
    hb = ls / 2.75

    geo.addPoint((L / 2) + (CW / 2), 0.0, 0.0, hf, 1)
    geo.addPoint(L, 0.0, 0.0, h, 2)
    geo.addPoint(L, H, 0.0, h, 3)
    geo.addPoint(LR, H, 0.0, hf, 4)
    geo.addPoint(LL, H, 0.0, hf, 5)
    geo.addPoint(0.0, H, 0.0, h, 6)
    geo.addPoint(0.0, 0.0, 0.0, h, 7)
    geo.addPoint((L / 2) - (CW / 2), 0.0, 0.0, hf, 8)
    geo.addPoint((L / 2), CH, 0.0, hfc, 9)

    for i in range(1, 9):
        geo.addLine(i, i + 1, i)
    geo.addLine(9, 1, 9)
    geo.addCurveLoop(list(range(1, 10)), 1)
    geo.addPlaneSurface([1], 1)

    gmsh.model.addPhysicalGroup(2, [1], 1)
    gmsh.model.addPhysicalGroup(1, [4], 1)
    gmsh.model.addPhysicalGroup(0, [7], 2)
    gmsh.model.addPhysicalGroup(0, [2], 3)
    gmsh.model.setPhysicalName(2, 1, "Domain")
    gmsh.model.setPhysicalName(1, 1, "LoadLine")
    gmsh.model.setPhysicalName(0, 2, "LeftSupport")
    gmsh.model.setPhysicalName(0, 3, "RightSupport")

    field = gmsh.model.mesh.field
    field.add("Box", 10)
    field.setNumber(10, "VIn", hb)
    field.setNumber(10, "VOut", h)
    field.setNumber(10, "XMin", (L / 2) - 1.5 * CW)
    field.setNumber(10, "XMax", (L / 2) + 1.5 * CW)
    field.setNumber(10, "YMin", 0)
    field.setNumber(10, "YMax", H)
    field.setNumber(10, "Thickness", 0.3)
    field.setAsBackgroundMesh(10)
    geo.synchronize()


def asymmetric_tpb(ls, e1, e2, fmr_factor=40.0):
    """Notched beam with three holes under asymmetric bending (lengths in inches).

    e1 is the notch offset from mid-span, e2 the notch height.
    """
    geo = gmsh.model.geo
    L = 20.0
    LL = 0.475 * L
    LR = 0.525 * L
    H = 8.0
    CH = e2
    CW = L / 2000
    CP = L / 2 - e1
    SD = 1.0
    HP = 6.0
    HR = 0.25
    HH1, HH2, HH3 = 2.75, 4.75, 6.75

    hfc = ls / 50
    hf = ls / 2.1
    hfl = 50 * hf
    hfh = hf
    h = 100 * hf
    theta = math.pi / 180
    cr1 = CP + (CW / 2) + HP * math.tan(theta)
    cr2 = CP - (CW / 2) + HP * math.tan(theta)
    FMR = fmr_factor * ls

    p1 = geo.addPoint(CP + (CW / 2), 0.0, 0.0, h)
    p2 = geo.addPoint(L - SD, 0.0, 0.0, h)
    p3 = geo.addPoint(L, 0.0, 0.0, h)
    p4 = geo.addPoint(L, H, 0.0, h)
    p5 = geo.addPoint(LR, H, 0.0, hfl)
    p6 = geo.addPoint(LL, H, 0.0, hfl)
    p7 = geo.addPoint(0.0, H, 0.0, h)
    p8 = geo.addPoint(0.0, 0.0, 0.0, h)
    p9 = geo.addPoint(SD, 0.0, 0.0, h)
    p10 = geo.addPoint(CP - (CW / 2), 0.0, 0.0, h)
    p11 = geo.addPoint(CP - (CW / 2), CH, 0.0, hfc)
    p12 = geo.addPoint(CP + (CW / 2), CH, 0.0, hfc)

    pts = [p1, p2, p3, p4, p5, p6, p7, p8, p9, p10, p11, p12]
    lines = [geo.addLine(pts[i], pts[(i + 1) % 12]) for i in range(12)]
    l5 = lines[4]
    cl1 = geo.addCurveLoop(lines)

    loops = []
    for hh in (HH1, HH2, HH3):
        a = geo.addPoint(HP - HR, hh, 0.0, hfh)
        b = geo.addPoint(HP + HR, hh, 0.0, hfh)
        c = geo.addPoint(HP, hh, 0.0, hfh)
        ca1 = geo.addCircleArc(a, c, b)
        ca2 = geo.addCircleArc(b, c, a)
        loops.append(geo.addCurveLoop([ca1, ca2]))

    ps1 = geo.addPlaneSurface([cl1] + [-cl for cl in loops])

    pg1 = gmsh.model.addPhysicalGroup(2, [ps1])
    pg2 = gmsh.model.addPhysicalGroup(1, [l5])
    pg3 = gmsh.model.addPhysicalGroup(0, [p9])
    pg4 = gmsh.model.addPhysicalGroup(0, [p2])
    gmsh.model.setPhysicalName(2, pg1, "Domain")
    gmsh.model.setPhysicalName(1, pg2, "LoadLine")
    gmsh.model.setPhysicalName(0, pg3, "LeftSupport")
    gmsh.model.setPhysicalName(0, pg4, "RightSupport")

    p22 = geo.addPoint(CP - (CW / 2), 0.8 * CH, 0.0, hf)
    p23 = geo.addPoint(CP + (CW / 2), 0.8 * CH, 0.0, hf)
    p24 = geo.addPoint(HP, cr1, 0.0, hf)
    p25 = geo.addPoint(HP, cr2, 0.0, hf)
    l13 = geo.addLine(p22, p24)
    l14 = geo.addLine(p23, p25)
    l15 = geo.addLine(p24, p6)
    l16 = geo.addLine(p23, p5)

    field = gmsh.model.mesh.field
    field.add("Distance", 1)
    field.setNumbers(1, "EdgesList", [l13, l14])
    field.add("Threshold", 2)
    field.setNumber(2, "IField", 1)
    field.setNumber(2, "LcMin", hf)
    field.setNumber(2, "LcMax", h)
    field.setNumber(2, "DistMin", FMR)
    field.setNumber(2, "DistMax", 1.5 * FMR)
    field.add("Distance", 3)
    field.setNumbers(3, "EdgesList", [l15, l16])
    field.add("Threshold", 4)
    field.setNumber(4, "IField", 3)
    field.setNumber(4, "LcMin", hfl)
    field.setNumber(4, "LcMax", h)
    field.setNumber(4, "DistMin", FMR)
    field.setNumber(4, "DistMax", 1.5 * FMR)
    field.add("Min", 5)
    field.setNumbers(5, "FieldsList", [2, 4])
    field.setAsBackgroundMesh(5)
    geo.synchronize()


def write_both(name, build, out_dir):
    for version, suffix in ((2.2, "v22"), (4.1, "v41")):
        gmsh.initialize()
        gmsh.option.setNumber("General.Terminal", 0)
        gmsh.option.setNumber("General.NumThreads", 1)
        gmsh.option.setNumber("Mesh.RandomSeed", 1)
        gmsh.model.add(name)
        build()
        gmsh.model.mesh.generate(2)
        gmsh.option.setNumber("Mesh.MshFileVersion", version)
        gmsh.option.setNumber("Mesh.Binary", 0)
        path = os.path.join(out_dir, f"{name}_{suffix}.msh")
        gmsh.write(path)
        gmsh.finalize()
        print(path, os.path.getsize(path))


FIXTURES = {
    # desk-scale symmetric beam, l_s = 0.06 mm
    "tpb_symmetric_coarse": lambda: symmetric_tpb(0.06),
    # full resolution symmetric beam, l_s = 0.03 mm
    "tpb_symmetric_fine": lambda: symmetric_tpb(0.03),
    # three-hole beams at the coarsened l_s = 0.05 in
    "tpb_asym_a_coarse": lambda: asymmetric_tpb(0.05, 6.0, 1.0, 8.0),
    "tpb_asym_b_coarse": lambda: asymmetric_tpb(0.05, 5.0, 1.5, 8.0),
    "tpb_asym_c_coarse": lambda: asymmetric_tpb(0.05, 4.75, 1.5, 8.0),
}

# Full resolution three-hole beams, ~450k elements each; not committed.
LARGE = {
    "tpb_asym_a_fine": lambda: asymmetric_tpb(0.01, 6.0, 1.0),
    "tpb_asym_b_fine": lambda: asymmetric_tpb(0.01, 5.0, 1.5),
    "tpb_asym_c_fine": lambda: asymmetric_tpb(0.01, 4.75, 1.5),
}


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=os.path.dirname(os.path.abspath(__file__)))
    parser.add_argument("names", nargs="*", default=sorted(FIXTURES),
                        choices=sorted(FIXTURES) + sorted(LARGE))
    args = parser.parse_args()
    for name in args.names:
        write_both(name, {**FIXTURES, **LARGE}[name], args.out)
