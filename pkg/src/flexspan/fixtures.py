"""Reference parameter sets and computed angles, transcribed digit for digit."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .params import ParameterSet, SubType

_I_OEE = [
    (4, "l1=10, l2=11, l3=12, l4=13; L1=8, L2=9"),
    (6, "l1=10, l2=12, l3=11, l4=12, l5=11, l6=13; L1=3, L2=4, L3=5"),
    (8, "l1=10, l2=12, l3=11, l4=13, l5=14, l6=16, l7=15, l8=14; L1=4, L2=3, L3=5, L4=6"),
    (10, "l1=10, l2=13, l3=15, l4=13, l5=16, l6=12, l7=15, l8=14, l9=12, l10=13; "
         "L1=10, L2=11, L3=12, L4=14, L5=13"),
    (12, "l1=10, l2=13, l3=15, l4=13, l5=16, l6=12, l7=15, l8=14, l9=12, l10=13, l11=14, l12=11; "
         "L1=10, L2=11, L3=12, L4=14, L5=13, L6=12"),
    (14, "l1=10, l2=13, l3=15, l4=13, l5=16, l6=12, l7=15, l8=14, l9=12, l10=13, l11=14, l12=11, "
         "l13=13, l14=12; L1=10, L2=15, L3=12, L4=14, L5=13, L6=12, L7=11"),
    (16, "l1=10, l2=11, l3=12, l4=10, l5=10, l6=12, l7=11, l8=12, l9=10, l10=12, l11=11, l12=12, "
         "l13=10, l14=12, l15=11, l16=12; L1=10, L2=11, L3=12, L4=10, L5=12, L6=10, L7=12, L8=11"),
]

_II_AEE = [
    (4, "l1=10, l2=11, l3=12, l4=13; L1=5, L2=4"),
    (6, "l1=10, l2=14, l3=15, l4=12, l5=13, l6=11; L1=5, L2=4, L3=6"),
    (8, "l1=10, l2=11, l3=12, l4=13, l5=12, l6=11, l7=14, l8=13; L1=5, L2=6, L3=4, L4=3"),
    (10, "l1=10, l2=13, l3=14, l4=14, l5=12, l6=11, l7=13, l8=13, l9=17, l10=16; "
         "L1=10, L2=9, L3=8, L4=7, L5=7"),
    (12, "l1=10, l2=12, l3=11, l4=14, l5=13, l6=16, l7=15, l8=18, l9=17, l10=20, l11=19, l12=22; "
         "L1=15, L2=16, L3=17, L4=18, L5=19, L6=20"),
    (14, "l1=10, l2=12, l3=11, l4=14, l5=13, l6=16, l7=15, l8=18, l9=17, l10=20, l11=19, l12=22, "
         "l13=21, l14=24; L1=16, L2=17, L3=18, L4=19, L5=20, L6=21, L7=22"),
    (16, "l1=10, l2=15, l3=20, l4=11, l5=16, l6=21, l7=12, l8=17, l9=22, l10=13, l11=18, l12=23, "
         "l13=14, l14=19, l15=24, l16=17; L1=15, L2=16, L3=17, L4=18, L5=18, L6=17, L7=16, L8=15"),
]

_II_OEE = [
    (4, "l1=10, l2=13; m1=16, m2=12; L1=8, L2=7"),
    (6, "l1=10, l2=11, l3=12; m1=12, m2=13, m3=15; L1=5, L2=3, L3=4"),
    (8, "l1=10, l2=12, l3=11, l4=13; m1=14, m2=17, m3=15, m4=13; L1=4, L2=3, L3=5, L4=6"),
    (10, "l1=10, l2=13, l3=14, l4=15, l5=12; m1=18, m2=21, m3=19, m4=16, m5=15; "
         "L1=9, L2=10, L3=8, L4=6, L5=7"),
    (12, "l1=10, l2=13, l3=14, l4=15, l5=12, l6=11; m1=11, m2=14, m3=16, m4=13, m5=13, m6=12; "
         "L1=5, L2=4, L3=7, L4=8, L5=3, L6=9"),
    (14, "l1=10, l2=13, l3=14, l4=15, l5=12, l6=11, l7=13; m1=11, m2=14, m3=15, m4=16, m5=13, "
         "m6=12, m7=14; L1=10, L2=10, L3=8, L4=7, L5=6, L6=9, L7=12"),
    (16, "l1=l2=l3=l4=l5=l6=l7=l8=10; m1=m2=m3=m4=m5=m6=m7=m8=13; "
         "L1=L3=L5=L7=8, L2=L4=L6=L8=10"),
]

# (N, L or K, parameters, flexible-suspension count)
_III_OAE = [
    (4, 3, "l1=10, alpha1=45, beta1=55, alpha2=30, beta2=20", 3),
    (6, 3, "l1=10, alpha1=45, beta1=55, alpha2=30, beta2=20, alpha3=25", 3),
    (6, 4, "l1=10, alpha1=22, beta1=70, alpha2=100, beta2=45, alpha3=40", 1),
    (8, 5, "l1=10, alpha1=69, beta1=55, alpha2=30, beta2=45, alpha3=25, alpha5=21", 3),
    (10, 5, "l1=10, alpha1=54, beta1=75, alpha2=47, beta2=47, alpha3=35, alpha5=6, alpha7=41", 8),
    (12, 7, "l1=10, alpha1=75, beta1=70, alpha2=30, beta2=50, alpha3=25, alpha5=35, alpha7=20, "
            "alpha9=40", 5),
    (14, 8, "l1=10, alpha1=71, beta1=76, alpha2=70, beta2=31, alpha3=32, alpha5=29, alpha7=23, "
            "alpha9=37, alpha11=30", 13),
    (16, 8, "l1=10, alpha1=71, beta1=76, alpha2=70, beta2=30, alpha3=36, alpha5=33, alpha7=23, "
            "alpha9=37, alpha11=31, alpha13=28", 10),
]

_III_OAS = [
    (4, 1, "l1=10, alpha1=105, beta1=30, alpha2=110, beta2=25", 2),
    (6, 1, "l1=10, alpha1=45, beta1=80, alpha2=42, beta2=37, alpha3=48", 4),
    (8, 1, "l1=10, alpha1=30, beta1=85, alpha2=40, beta2=70, alpha3=45, alpha5=45", 5),
    (10, 1, "l1=10, alpha1=30, beta1=91, alpha2=31, beta2=75, alpha3=27, alpha5=25, alpha7=30", 3),
    (12, 1, "l1=10, alpha1=41, beta1=104, alpha2=29, beta2=75, alpha3=27, alpha5=48, alpha7=21, "
            "alpha9=33", 1),
    (14, 2, "l1=10, alpha1=55, beta1=55, alpha2=100, beta2=40, alpha3=49, alpha5=57, alpha7=55, "
            "alpha9=48, alpha11=50", 6),
    (16, 3, "l1=10, alpha1=70, beta1=63, alpha2=69, beta2=59, alpha3=62, alpha5=66, alpha7=69, "
            "alpha9=67, alpha11=68, alpha13=65", 3),
]

# computed angles (degrees) and dihedral identifiers of one completion per row
_III_OAE_COMPUTED = [
    ("alpha4=30; beta3=112.12184, beta4=87.83527", 9, "9"),
    ("alpha4=16.40308, alpha6=13.59692; beta3=112.12184, beta4=118.35370, beta5=126.47742, "
     "beta6=104.23836", 41, "29"),
    ("alpha4=83.30367, alpha6=16.69633; beta3=21.45580, beta4=60.58002, beta5=74.47896, "
     "beta6=82.03499", 53, "35"),
    ("alpha4=83.32691, alpha6=60.25878, alpha8=53.06814; beta3=107.57407, beta4=60.98961, "
     "beta5=111.23558, beta6=23.65624, beta7=79.35616, beta8=41.30176", 55, "37"),
    ("alpha4=100.88503, alpha6=94.89234, alpha8=42.70820, alpha10=10.28448; beta3=27.48350, "
     "beta4=53.22171, beta5=151.69262, beta6=22.74071, beta7=126.67290, beta8=37.49349, "
     "beta9=100.91108, beta10=12.47047", 805, "325"),
    ("alpha4=64.27757, alpha6=66.40444, alpha8=67.23134, alpha10=63.46828, alpha12=29.98240; "
     "beta3=113.98589, beta4=42.89481, beta5=53.01637, beta6=69.15124, beta7=140.43696, "
     "beta8=25.11212, beta9=111.18488, beta10=36.54932, beta11=65.99163, beta12=26.93834",
     3149, "C4D"),
    ("alpha4=79.94471, alpha6=64.21691, alpha8=28.13814, alpha10=69.71837, alpha12=106.32765, "
     "alpha14=9.97746; beta3=130.35037, beta4=72.30741, beta5=29.55757, beta6=46.24987, "
     "beta7=18.56180, beta8=90.38385, beta9=131.26467, beta10=51.31861, beta11=24.06035, "
     "beta12=41.67901, beta13=19.54221, beta14=122.67419", 1009, "3F1"),
    ("alpha4=77.23450, alpha6=58.22912, alpha8=38.51987, alpha10=40.02534, alpha12=72.02307, "
     "alpha14=16.65480, alpha16=38.24054; beta3=119.99899, beta4=64.61507, beta5=41.84098, "
     "beta6=57.99019, beta7=24.38078, beta8=88.80814, beta9=111.30147, beta10=69.20590, "
     "beta11=62.35174, beta12=40.78832, beta13=30.57510, beta14=93.17456, beta15=53.05563, "
     "beta16=85.23613", 3697, "E71"),
]

_III_OAS_COMPUTED = [
    ("alpha4=70.00000; beta3=82.95205, beta4=50.47518", 3, "3"),
    ("alpha4=105.95429, alpha6=32.04571; beta3=99.13918, beta4=49.21957, beta5=37.80644, "
     "beta6=28.97738", 49, "31"),
    ("alpha4=91.18022, alpha6=47.37676, alpha8=1.44302; beta3=40.43044, beta4=50.99966, "
     "beta5=34.62276, beta6=120.10265, beta7=27.97615, beta8=127.09938", 53, "35"),
    ("alpha4=2.29641, alpha6=65.48725, alpha8=56.38952, alpha10=24.82681; beta3=105.25131, "
     "beta4=84.73441, beta5=130.85701, beta6=48.10408, beta7=63.33243, beta8=56.76065, "
     "beta9=35.09934, beta10=65.39581", 799, "31F"),
    ("alpha4=90.80897, alpha6=16.13559, alpha8=3.70555, alpha10=23.68880, alpha12=16.66108; "
     "beta3=53.32442, beta4=35.56317, beta5=23.46576, beta6=104.33625, beta7=67.20918, "
     "beta8=115.40075, beta9=87.09237, beta10=109.81759, beta11=109.93166, beta12=129.25846",
     4081, "FF1"),
    ("alpha4=52.66573, alpha6=17.47293, alpha8=9.54257, alpha10=25.82052, alpha12=137.95959, "
     "alpha14=16.53867; beta3=34.84383, beta4=111.74521, beta5=29.50679, beta6=120.94430, "
     "beta7=53.40928, beta8=47.83117, beta9=91.51635, beta10=21.79280, beta11=108.12969, "
     "beta12=19.54775, beta13=39.29289, beta14=101.21476", 6197, "1835"),
    ("alpha4=35.52177, alpha6=88.31987, alpha8=87.36781, alpha10=70.20535, alpha12=39.37543, "
     "alpha14=64.82772, alpha16=85.38206; beta3=56.25741, beta4=52.29144, beta5=77.21017, "
     "beta6=32.20233, beta7=69.65471, beta8=50.95207, beta9=36.56857, beta10=62.72476, "
     "beta11=44.85946, beta12=78.08803, beta13=76.63756, beta14=42.06629, beta15=62.48605, "
     "beta16=36.20026", 14549, "38D5"),
]

_TOKEN = re.compile(r"^([A-Za-z]+)(\d+)$")


def parse_assignments(text: str) -> dict[str, dict[int, str]]:
    """'l1=l2=10, L1=8' -> {'l': {1: '10', 2: '10'}, 'L': {1: '8'}}; values kept as text."""
    out: dict[str, dict[int, str]] = {}
    for part in re.split(r"[;,]", text):
        part = part.strip().rstrip(".")
        if not part:
            continue
        *names, value = [p.strip() for p in part.split("=")]
        if not names:
            raise ValueError(f"not an assignment: {part!r}")
        for n in names:
            m = _TOKEN.match(n)
            if not m:
                raise ValueError(f"bad symbol {n!r}")
            out.setdefault(m.group(1), {})[int(m.group(2))] = value
    return out


@dataclass
class Fixture:
    name: str
    table: str
    row: int
    subtype: SubType
    N: int
    text: str
    index: int | None = None
    fs_count: int | None = None
    computed: str | None = None
    di: int | None = None
    di_hex: str | None = None
    extra: dict = field(default_factory=dict)

    def params(self) -> ParameterSet:
        vals = parse_assignments(self.text)
        f = lambda d: {k: float(v) for k, v in d.items()}
        seq = lambda name: tuple(float(v) for _, v in sorted(vals.get(name, {}).items()))
        if self.subtype.symmetric:
            p = ParameterSet(self.subtype, self.N, l=seq("l"), m=seq("m"), L=seq("L"))
        else:
            p = ParameterSet(self.subtype, self.N, l=seq("l"), index=self.index,
                             alpha=f(vals.get("alpha", {})), beta=f(vals.get("beta", {})))
        return p.validate()

    def expected_angles(self) -> dict[str, dict[int, float]]:
        if self.computed is None:
            return {}
        return {name: {k: float(v) for k, v in d.items()}
                for name, d in parse_assignments(self.computed).items()}


def _build() -> dict[str, Fixture]:
    cat: dict[str, Fixture] = {}
    for table, st, rows in (("D-I", SubType.I_OEE, _I_OEE), ("D-II", SubType.II_AEE, _II_AEE),
                            ("D-III", SubType.II_OEE, _II_OEE)):
        for i, (N, text) in enumerate(rows, 1):
            cat[f"{table}#{i}"] = Fixture(f"{table}#{i}", table, i, st, N, text)
    for table, st, rows, comp in (("D-IV", SubType.III_OAE, _III_OAE, _III_OAE_COMPUTED),
                                  ("D-V", SubType.III_OAS, _III_OAS, _III_OAS_COMPUTED)):
        for i, ((N, idx, text, fs), (angles, di, hx)) in enumerate(zip(rows, comp), 1):
            cat[f"{table}#{i}"] = Fixture(f"{table}#{i}", table, i, st, N, text, index=idx,
                                          fs_count=fs, computed=angles, di=di, di_hex=hx)
    return cat


CATALOG: dict[str, Fixture] = _build()


def get(name: str) -> Fixture:
    key = name.strip().upper().replace(" ", "")
    for k, fx in CATALOG.items():
        if k.upper() == key:
            return fx
    raise KeyError(f"unknown fixture {name!r}; known: {', '.join(CATALOG)}")


def by_table(table: str) -> list[Fixture]:
    return [fx for fx in CATALOG.values() if fx.table == table]
