#!/usr/bin/env python3
"""Regenerates the bundled maps, scenarios and suites under data/.

All maps are 8-bit binary PGM files: 255 is free space, 0 is an obstacle.
Boxes below are (row0, row1, col0, col1) half-open cell ranges.
"""

import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"
RES = 0.05


def blank(width, height):
    return [[255] * width for _ in range(height)]


def fill(img, r0, r1, c0, c1, value=0):
    for r in range(max(r0, 0), min(r1, len(img))):
        for c in range(max(c0, 0), min(c1, len(img[0]))):
            img[r][c] = value


def write_pgm(name, img):
    path = ROOT / "maps" / name
    path.parent.mkdir(parents=True, exist_ok=True)
    height, width = len(img), len(img[0])
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (width, height))
        f.write(bytes(v for row in img for v in row))


def boxes_map():
    img = blank(100, 100)
    for box in [(18, 34, 24, 44), (55, 75, 14, 30), (40, 60, 48, 66), (14, 30, 64, 84), (70, 86, 60, 80)]:
        fill(img, *box)
    return img


def wall_gap_map():
    img = blank(100, 100)
    fill(img, 0, 78, 47, 53)
    fill(img, 40, 46, 75, 100)
    return img


def zigzag_map():
    img = blank(100, 100)
    fill(img, 28, 38, 0, 74)
    fill(img, 62, 72, 26, 100)
    return img


def pillars_map():
    img = blank(100, 100)
    for r in range(20, 80, 24):
        for c in range(20, 80, 24):
            fill(img, r, r + 10, c, c + 10)
    return img


def rooms_map():
    img = blank(100, 100)
    fill(img, 46, 54, 0, 100)
    fill(img, 0, 100, 46, 54)
    for r0, r1, c0, c1 in [(46, 54, 18, 32), (46, 54, 68, 82), (18, 32, 46, 54), (68, 82, 46, 54)]:
        fill(img, r0, r1, c0, c1, 255)
    return img


def narrow_map():
    img = blank(100, 100)
    fill(img, 0, 100, 46, 54)
    fill(img, 30, 33, 46, 54, 255)  # 3 cells: only small robots pass
    fill(img, 84, 96, 46, 54, 255)  # wide gap near the bottom
    fill(img, 60, 66, 10, 36)
    fill(img, 20, 26, 64, 90)
    return img


def hallway_map():
    img = blank(100, 60)
    fill(img, 0, 60, 40, 60)
    fill(img, 27, 33, 40, 60, 255)  # 6 cells = 0.3 m, narrower than two 0.2 m diameters
    return img


def sealed_map():
    img = blank(100, 100)
    fill(img, 60, 90, 60, 90)
    fill(img, 63, 87, 63, 87, 255)
    return img


def passage_map():
    img = blank(100, 100)
    fill(img, 0, 100, 48, 52)
    fill(img, 48, 52, 48, 52, 255)  # 4 cells = 0.2 m
    return img


def crossing_map():
    img = blank(100, 100)
    for box in [(0, 12, 0, 12), (0, 12, 88, 100), (88, 100, 0, 12), (88, 100, 88, 100)]:
        fill(img, *box)
    return img


def corridor_map():
    img = blank(100, 100)
    fill(img, 0, 100, 0, 100)
    fill(img, 10, 90, 10, 40, 255)
    fill(img, 10, 90, 60, 90, 255)
    fill(img, 44, 56, 40, 60, 255)
    return img


COMMON = """resolution = 0.05
lambda = 1.0
qc = 1.0
steps = 99
total_time = 12.0
sigma_obs = 0.1
epsilon = 0.05
v_max = 0.5
seed = 7
"""


def write(rel, text):
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def agent_lines(agents):
    return "".join(f"agent {a} radius={r} start={x},{y}\n" for a, r, x, y in agents)


def role_lines(roles):
    return "".join(f"role {i} dest={x},{y}\n" for i, x, y in roles)


def scenario(name, map_name, agents, roles, extra=""):
    text = f"name = {name}\nmap = ../maps/{map_name}\n" + COMMON + extra + agent_lines(agents) + role_lines(roles)
    write(f"scenarios/{name}.scn", text)


# Initialisation study: four large robots crossing each environment.
ENVIRONMENTS = {
    "env1_boxes": (boxes_map, [(0.4, 0.5), (0.4, 2.0), (0.4, 3.4), (0.4, 4.6)], [(4.6, 4.5), (4.6, 3.0), (4.6, 1.6), (4.6, 0.4)]),
    "env2_wall_gap": (wall_gap_map, [(0.5, 0.5), (0.5, 1.7), (0.5, 2.9), (1.0, 4.6)], [(4.5, 0.5), (4.5, 1.5), (4.5, 3.2), (4.0, 4.6)]),
    "env3_zigzag": (zigzag_map, [(0.5, 0.4), (2.0, 0.4), (3.5, 0.4), (4.6, 0.8)], [(0.5, 4.6), (2.0, 4.6), (3.5, 4.6), (4.6, 4.2)]),
    "env4_pillars": (pillars_map, [(0.3, 0.3), (0.3, 2.5), (0.3, 4.7), (2.5, 0.3)], [(4.7, 4.7), (4.7, 2.5), (4.7, 0.3), (2.5, 4.7)]),
    "env5_rooms": (rooms_map, [(0.6, 0.6), (1.8, 0.6), (0.6, 1.8), (1.8, 1.8)], [(4.4, 4.4), (3.2, 4.4), (4.4, 3.2), (3.2, 3.2)]),
    "env6_narrow": (narrow_map, [(0.5, 0.5), (0.5, 1.6), (1.4, 2.5), (0.5, 4.0)], [(4.5, 4.5), (4.5, 3.4), (3.6, 2.5), (4.5, 0.8)]),
}

MIXED_TYPES = [0.02, 0.02, 0.02, 0.1, 0.1, 0.1]
MIXED_LAYOUT = {
    "env1_boxes": ([(0.4, 0.5), (0.4, 1.5), (0.4, 2.5), (0.4, 3.5), (0.4, 4.5), (2.4, 4.7)],
                   [(4.6, 0.4), (4.6, 1.4), (4.6, 2.4), (4.6, 3.4), (4.6, 4.6), (2.6, 0.3)]),
    "env2_wall_gap": ([(0.5, 0.5), (0.5, 1.3), (0.5, 2.1), (0.5, 2.9), (0.5, 3.7), (1.5, 4.6)],
                      [(4.5, 0.5), (4.5, 1.3), (4.5, 2.9), (4.0, 3.7), (3.2, 4.6), (4.5, 4.6)]),
    "env3_zigzag": ([(0.4, 0.4), (1.2, 0.4), (2.0, 0.4), (2.8, 0.4), (3.6, 0.4), (4.4, 0.4)],
                    [(0.4, 4.6), (1.2, 4.6), (2.0, 4.6), (2.8, 4.6), (3.6, 4.6), (4.4, 4.6)]),
    "env4_pillars": ([(0.3, 0.3), (0.3, 1.5), (0.3, 2.5), (0.3, 3.5), (0.3, 4.7), (2.5, 0.3)],
                     [(4.7, 0.3), (4.7, 1.5), (4.7, 2.5), (4.7, 3.5), (4.7, 4.7), (2.5, 4.7)]),
    "env5_rooms": ([(0.6, 0.6), (1.6, 0.6), (0.6, 1.6), (3.4, 0.6), (4.4, 0.6), (4.4, 1.6)],
                   [(4.4, 4.4), (3.4, 4.4), (4.4, 3.4), (1.6, 4.4), (0.6, 4.4), (0.6, 3.4)]),
    "env6_narrow": ([(0.5, 0.5), (0.5, 1.6), (0.8, 2.7), (0.5, 4.0), (1.5, 2.2), (1.5, 4.6)],
                    [(4.5, 4.5), (4.5, 3.4), (3.6, 2.5), (4.5, 0.8), (3.5, 1.5), (4.0, 4.0)]),
}


def main():
    for name, (builder, _, _) in ENVIRONMENTS.items():
        write_pgm(f"{name}.pgm", builder())
    write_pgm("hallway.pgm", hallway_map())
    write_pgm("open64.pgm", blank(64, 64))
    write_pgm("sealed_room.pgm", sealed_map())
    write_pgm("passage.pgm", passage_map())
    write_pgm("crossing.pgm", crossing_map())
    write_pgm("corridor.pgm", corridor_map())

    init_suite, assign_suite = [], []
    for name, (_, starts, dests) in ENVIRONMENTS.items():
        agents = [(f"a{i + 1}", 0.1, x, y) for i, (x, y) in enumerate(starts)]
        roles = [(f"r{i + 1}", x, y) for i, (x, y) in enumerate(dests)]
        scenario(f"init_{name}", f"{name}.pgm", agents, roles)
        init_suite.append(f"scenario = ../scenarios/init_{name}.scn")
        starts6, dests6 = MIXED_LAYOUT[name]
        agents6 = [(f"a{i + 1}", MIXED_TYPES[i], x, y) for i, (x, y) in enumerate(starts6)]
        roles6 = [(f"r{i + 1}", x, y) for i, (x, y) in enumerate(dests6)]
        scenario(f"mixed_{name}", f"{name}.pgm", agents6, roles6)
        assign_suite.append(f"scenario = ../scenarios/mixed_{name}.scn")

    write("suites/init_study.suite",
          "name = init_study\n" + "\n".join(init_suite) +
          "\ninit = emap, straight\nassign = gra\nsharing = conflict_field\n"
          "sigma_obs = 0.05, 0.10, 0.15, 0.2\nsimulate = false\n")
    write("suites/assign_study.suite",
          "name = assign_study\n" + "\n".join(assign_suite) +
          "\ninit = emap\nassign = gra, nn\nsharing = conflict_field\nsimulate = false\n")
    write("suites/sharing.suite",
          "name = sharing\nscenario = ../scenarios/four_robots.scn\nscenario = ../scenarios/hallway_swap.scn\n"
          "init = emap\nassign = gra\nsharing = conflict_field, last_position, pairwise_factor\nsimulate = true\n")

    # Four robots swapping diagonal corners through the map center.
    scenario("four_robots", "crossing.pgm",
             [("a1", 0.1, 1.0, 1.0), ("a2", 0.1, 4.0, 1.0), ("a3", 0.1, 4.0, 4.0), ("a4", 0.1, 1.0, 4.0)],
             [("r1", 4.0, 4.0), ("r2", 1.0, 4.0), ("r3", 1.0, 1.0), ("r4", 4.0, 1.0)])
    # Diamond: robots on the axes exchange opposite positions.
    scenario("diamond", "crossing.pgm",
             [("a1", 0.1, 2.5, 0.8), ("a2", 0.1, 4.2, 2.5), ("a3", 0.1, 2.5, 4.2), ("a4", 0.1, 0.8, 2.5)],
             [("north", 2.5, 4.2), ("west", 0.8, 2.5), ("south", 2.5, 0.8), ("east", 4.2, 2.5)])
    scenario("hallway_swap", "hallway.pgm",
             [("left", 0.1, 0.8, 1.5), ("right", 0.1, 4.2, 1.5)],
             [("east_room", 4.2, 1.5), ("west_room", 0.8, 1.5)],
             "total_time = 16.0\n")
    scenario("open_pair", "open64.pgm",
             [("a1", 0.1, 0.5, 0.5), ("a2", 0.1, 0.5, 2.7)],
             [("r1", 2.7, 2.7), ("r2", 2.7, 0.5)])
    scenario("head_on", "open64.pgm",
             [("west", 0.1, 0.5, 1.6), ("east", 0.1, 2.7, 1.6)],
             [("east_goal", 2.7, 1.6), ("west_goal", 0.5, 1.6)],
             "noise = 0.002\n")
    scenario("single_agent", "open64.pgm", [("solo", 0.1, 0.5, 1.6)], [("goal", 2.7, 1.6)])
    scenario("sealed_role", "sealed_room.pgm",
             [("a1", 0.1, 0.5, 0.5), ("a2", 0.1, 1.0, 0.5)],
             [("outside", 2.0, 2.0), ("inside", 3.75, 3.75)])
    scenario("two_types", "passage.pgm",
             [("small", 0.05, 0.8, 2.5), ("large", 0.1, 0.8, 1.2)],
             [("far_side", 4.2, 2.5)])
    scenario("map_change", "open64.pgm",
             [("a1", 0.1, 0.4, 1.6)], [("goal", 2.8, 1.6)],
             "map_event step=30 box=1.9,1.2,2.1,2.0\n")
    scenario("corridor_sealed", "corridor.pgm",
             [("a1", 0.1, 1.2, 2.5)], [("goal", 3.8, 2.5)],
             "map_event step=20 box=2.2,2.0,2.8,3.0\n")


if __name__ == "__main__":
    main()
