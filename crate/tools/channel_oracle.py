"""Independent evaluation of the link-budget formulas.

Prints the reference values frozen into the channel and geometry tests.
"""
import math

RE = 6371e3
H = 600e3


def slant(elev_deg, h=H):
    s = math.sin(math.radians(elev_deg))
    return math.sqrt(RE * RE * s * s + h * h + 2 * h * RE) - RE * s


def fspl(d, fc):
    return 32.45 + 20 * math.log10(fc) + 20 * math.log10(d)


def mw(dbm):
    return 10 ** (dbm / 10)


pls = 11 / math.sqrt(2)
eirp = 34 + 10 * math.log10(0.18) + 30
pl90 = 0.981 * fspl(H, 2) + 0.019 * (fspl(H, 2) + 25.5) + pls
pl10 = 0.282 * fspl(slant(10), 2) + 0.718 * (fspl(slant(10), 2) + 34.3) + pls

for a in range(10, 91, 10):
    print(f"slant({a} deg) = {slant(a)!r}")
print("fspl(600 km, 2 GHz) =", repr(fspl(H, 2)))
print("fspl(slant(10), 2 GHz) =", repr(fspl(slant(10), 2)))
print("scintillation =", repr(pls))
print("eirp per prb =", repr(eirp))
print("pl_total(90 deg) =", repr(pl90))
print("pl_total(10 deg) =", repr(pl10))
print("rss(pl_total 90 deg) =", repr(eirp - pl90))
print("sinr(-100; none; -121.4) =", repr(10 * math.log10(mw(-100) / mw(-121.4))))
print(
    "sinr(-105.74; -120, -125; -121.4) =",
    repr(10 * math.log10(mw(-105.74) / (mw(-120) + mw(-125) + mw(-121.4)))),
)
