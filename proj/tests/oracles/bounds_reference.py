"""High-precision reference values for the step-size integrals and the
closed-form bound chains. Values printed here are frozen into
tests/bounds_closed_form_test.cpp and the acceptance suite."""
import mpmath as mp

mp.mp.dps = 30


def step_integral(eta, alpha, coeff_scale=1):
    """exp(-c*eta^p) * int_0^eta exp(c*u^p) du, with p = 1-alpha and
    c = coeff_scale / (2(1-alpha))."""
    p = 1 - mp.mpf(alpha)
    c = mp.mpf(coeff_scale) / (2 * p)
    eta = mp.mpf(eta)
    return mp.quad(lambda u: mp.e ** (c * (u ** p - eta ** p)), [0, eta])


def delta_closed_alpha_half(eta):
    r = mp.sqrt(mp.mpf(eta))
    return 2 * (r - 1) + 2 * mp.e ** (-r)


def zeta_closed_alpha_half(eta, ratio):
    # t = sqrt(u): int_0^r 2 t e^{c t} dt = 2[e^{ct}(t/c - 1/c^2)]_0^r
    c = mp.mpf(ratio)  # ratio / (2 * 0.5)
    r = mp.sqrt(mp.mpf(eta))
    integral = 2 * (mp.e ** (c * r) * (r / c - 1 / c ** 2) + 1 / c ** 2)
    return mp.e ** (-c * r) * integral


if __name__ == "__main__":
    d_quad = step_integral("0.01", "0.5")
    d_closed = delta_closed_alpha_half("0.01")
    print("delta(0.01,0.5) quad   =", mp.nstr(d_quad, 20))
    print("delta(0.01,0.5) closed =", mp.nstr(d_closed, 20))
    z_quad = step_integral("0.01", "0.5", "0.5")
    print("zeta(0.01,0.5,ratio .5) quad   =", mp.nstr(z_quad, 20))
    print("zeta(0.01,0.5,ratio .5) closed =", mp.nstr(zeta_closed_alpha_half("0.01", "0.5"), 20))
    print("delta(0.001,0.5) =", mp.nstr(delta_closed_alpha_half("0.001"), 20))
    print("delta(0.1,0.3) quad =", mp.nstr(step_integral("0.1", "0.3"), 20))
    print("delta(0.5,0.9) quad =", mp.nstr(step_integral("0.5", "0.9"), 20))

    # sub-Gaussian trajectory, one step
    inc = mp.log(1 + mp.mpf("1e-4") * mp.mpf("2.5") / (100 * mp.mpf("2.5e-5")))
    print("subg increment =", mp.nstr(inc, 20), " bound =", mp.nstr(mp.sqrt(mp.mpf(100) / 1000 * inc), 20))

    # bounded trajectory: c0=c1=1, n=1000, eta=.01, sigma=.005, k=100
    term = 2 * d_closed * mp.mpf("0.01") / mp.mpf("0.005") ** 2
    print("bounded per-step term =", mp.nstr(term, 20),
          " bound =", mp.nstr(mp.sqrt(100 * term) / 1000, 20))

    # clipped sub-Gaussian: R=1, d=2, n=100, A=5, eta=.1, sigma=.1, k=4
    print("clipped subg =", mp.nstr(mp.sqrt(mp.mpf(2) / 100 * 4 * mp.log(26)), 20))

    # clipped bounded: c0=1, A=5, b=64, n=1e4, eta=1e-3, sigma=5e-3, alpha=.5, k=50
    d3 = delta_closed_alpha_half("0.001")
    per = 2 * d3 * 25 * 64 ** 2 * mp.mpf("0.001") / (mp.mpf(10) ** 8 * mp.mpf("0.005") ** 2)
    print("clipped bounded =", mp.nstr(2 * mp.sqrt(50 * per), 20))
