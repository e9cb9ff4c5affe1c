"""Independent high-precision evaluation of the reduced-order device equations.

Produces the golden values frozen into `tests/device_model.rs`. Uses mpmath at
50 significant digits and shares no code with the Rust implementation.

    python3 device_golden.py
"""
from mpmath import mp, mpf, exp, log, quad, sqrt

mp.dps = 50

PHIT = mpf("0.025852")
EPS_OX = mpf("3.453e-11")
L_T = mpf("20e-9")
V_BI = mpf("0.8")
SHARP = mpf("0.01")

# Traditional n-type fixture (data/fixtures/traditional_n.model).
P0 = dict(
    vth0="0.30", delvt="0.02", u0="0.030", ua="0.30", ub="0.05", ud="0.10",
    ucs="1.5", cdsc="0.10", cdscd="0.05", dvt0="0.10", dvt1="0.50",
    etab="0.05", vsat="8.0e4", pvag="0.20", ckappa="0.60", cf="1.0e-17",
    cgso="1.0e-10", cgdo="1.0e-10", cgsl="5.0e-11", cgdl="5.0e-11", moin="6.0",
)
P0 = {k: mpf(v) for k, v in P0.items()}
TOX = mpf("1e-9")
L = mpf("48e-9")
W = mpf("192e-9")


def softplus(x):
    return log(1 + exp(x))


def sigma(x):
    return 1 / (1 + exp(-x))


def drain_current(p, vgs, vds):
    vgs, vds = mpf(vgs), mpf(vds)
    if vds < 0:
        return -drain_current(p, vgs - vds, -vds)
    cox = EPS_OX / TOX
    n = max(mpf(1), 1 + p["cdsc"] + p["cdscd"] * vds)
    nphi = n * PHIT
    vth = p["vth0"] - p["dvt0"] * exp(-p["dvt1"] * L / L_T) * V_BI - abs(p["etab"]) * vds
    vgsteff = nphi * softplus((vgs - vth) / nphi)
    e = vgsteff
    mu = p["u0"] / (1 + p["ua"] * e + p["ub"] * e**2 + p["ud"] * e ** p["ucs"])
    F = lambda u: softplus(u / 2) ** 2
    i_f = F((vgs - vth) / nphi)
    i_r = F((vgs - vth - n * vds) / nphi)
    i0 = 2 * n * mu * cox * (W / L) * PHIT**2 * (i_f - i_r)
    ksat = mu / (2 * p["vsat"] * L)
    vdsat = 2 * (vgsteff / n) / (1 + sqrt(1 + 2 * ksat * vgsteff / n))
    smin = -SHARP * log(exp(-vds / SHARP) + exp(-vdsat / SHARP))
    i_d = i0 / (1 + smin * ksat)
    smax = SHARP * softplus((vds - vgsteff) / SHARP)
    return i_d * (1 + p["pvag"] * vgsteff * smax)


def gate_capacitance(p, vg):
    vg = mpf(vg)
    cox = EPS_OX / TOX
    intrinsic = W * L * cox * sigma((vg - p["vth0"] - p["delvt"]) / (p["moin"] * PHIT))
    fixed = W * (p["cgso"] + p["cgdo"]) + p["cf"]
    low = W * (p["cgsl"] + p["cgdl"]) * (1 - sigma(vg / p["ckappa"]))
    return intrinsic + fixed + low


if __name__ == "__main__":
    print("I_D(vgs=1.0, vds=1.0)  =", mp.nstr(drain_current(P0, 1, 1), 17))
    print("I_D(vgs=0.0, vds=1.0)  =", mp.nstr(drain_current(P0, 0, 1), 17))
    print("I_D(vgs=0.6, vds=0.05) =", mp.nstr(drain_current(P0, "0.6", "0.05"), 17))
    print("C_G(vg=0.2)            =", mp.nstr(gate_capacitance(P0, "0.2"), 17))
    print("Q(1.0)                 =", mp.nstr(quad(lambda u: gate_capacitance(P0, u), [0, 1]), 17))
    h = mpf("1e-7")
    for vgs, vds in (("0.8", "1.0"),):
        gm = (drain_current(P0, mpf(vgs) + h, vds) - drain_current(P0, mpf(vgs) - h, vds)) / (2 * h)
        gds = (drain_current(P0, vgs, mpf(vds) + h) - drain_current(P0, vgs, mpf(vds) - h)) / (2 * h)
        print(f"gm(vgs={vgs}, vds={vds})  =", mp.nstr(gm, 17))
        print(f"gds(vgs={vgs}, vds={vds}) =", mp.nstr(gds, 17))
