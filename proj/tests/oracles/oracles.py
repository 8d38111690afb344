"""Independent high-precision reference values frozen into the C++ tests.

Run: python3 tests/oracles/oracles.py
"""
import mpmath as mp

mp.mp.dps = 30


def q(s, a):
    # 1/(2s) - int_0^1 (t^a - 1)(1 - t^b) / (1-t)^(1+2s) dt with b = 2s-1-a > -1;
    # the t^b part near 0 is integrated in closed form since it concentrates as b -> -1
    s, a = mp.mpf(s), mp.mpf(a)
    b = 2 * s - 1 - a
    F = lambda t: (t**a - 1) * (1 - t**b) / (1 - t)**(1 + 2 * s)
    pts = [0, mp.mpf('1e-12'), mp.mpf('1e-8'), mp.mpf('1e-4'), mp.mpf('1e-2'), mp.mpf(1) / 4, mp.mpf(1) / 2]
    lo = mp.quad(lambda t: F(t) - t**b, pts) + mp.mpf(1) / 2**(b + 1) / (b + 1)
    hi = mp.quad(F, [mp.mpf(1) / 2, mp.mpf(3) / 4, 1])
    return 1 / (2 * s) - lo - hi


def q_line(s, a):
    # direct PV of int (rho_a(1) - rho_a(r)) |1 - r|^(-1-2s) dr by symmetric pairs;
    # the pair 2 - (1+t)^a - (1-t)^a uses its even series near t = 0 to avoid cancellation
    s, a = mp.mpf(s), mp.mpf(a)

    def pair(t):
        if t < mp.mpf('1e-3'):
            return -2 * mp.fsum(mp.binomial(a, k) * t**k for k in range(2, 40, 2))
        return 2 - (1 + t)**a - (1 - t)**a

    near = mp.quad(lambda t: pair(t) * t**(-1 - 2 * s), [0, mp.mpf(1) / 2, 1])
    far = mp.quad(lambda t: (2 - (1 + t)**a) * t**(-1 - 2 * s), [1, 2, mp.inf])
    return near + far


def a_ns(n, s):
    return mp.pi**((n - 1) / mp.mpf(2)) * mp.gamma((1 + 2 * s) / 2) / mp.gamma((n + 2 * s) / 2)


def beta_tail(a, s):
    return mp.beta(a + 1, 2 * s - a)


def alpha0(s, nu):
    target = (1 - mp.mpf(nu) / 2) / (2 * s)
    lo, hi = max(2 * s - 1, 0) + mp.mpf('1e-20'), 2 * s - mp.mpf('1e-20')
    return mp.findroot(lambda a: q(s, a) - target, (lo + mp.mpf('1e-6'), hi - mp.mpf('1e-6')), solver='anderson')


def M0(s, nu, n=1):
    a = alpha0(s, nu)
    return -nu / ((2 + a - 2 * s) * (1 + a - 2 * s)) * a_ns(n, s) * beta_tail(a, s)


def chart(fn, s, n=2):
    # int_R fn(y) (1+y^2)^(-(n+2s)/2) dy
    return mp.quad(lambda y: fn(y) * (1 + y * y)**(-(n + 2 * s) / 2), [-mp.inf, -1, 0, 1, mp.inf])


def profile_terms(s, nu, n=1):
    # alpha0, M0, L1, M1 of the homogeneous profile
    s, nu = mp.mpf(s), mp.mpf(nu)
    K = a_ns(n, s)
    a0 = alpha0(s, nu)
    target = (1 - nu / 2) / (2 * s)
    step = 2 - 2 * s
    m0 = -nu * K * beta_tail(a0, s) / ((a0 + step) * (a0 + step - 1))
    a1 = a0 + step
    L1 = nu / 2 * m0 * beta_tail(a1, s) / (q(s, a1) - target)
    a2 = a0 + 2 * step
    M1 = (nu * K * m0 / (2 * s) - nu * K * L1 * beta_tail(a1, s)) / (a2 * (a2 - 1))
    return a0, m0, L1, M1


def anisotropic_instance():
    # h1 = 1 + 0.5 z1 z2/|z|^2, h2 = 1.5 + 0.25 z1 z2/|z|^2 + 0.3 z1^2/|z|^2, A = [[1,.3],[.3,1]], s = 0.75
    s = mp.mpf('0.75')
    h1 = lambda y: 1 + mp.mpf('0.5') * y / (1 + y * y)
    h2 = lambda y: mp.mpf('1.5') + mp.mpf('0.25') * y / (1 + y * y) + mp.mpf('0.3') * y * y / (1 + y * y)
    A1, A2 = chart(h1, s), chart(h2, s)
    M1, M2 = chart(lambda y: h1(y) * y, s), chart(lambda y: h2(y) * y, s)
    nu1 = mp.mpf('0.3')
    den = 2 * A1 - (2 * s - 1) / (2 * s) * A2
    definition = (nu1 * A1 / (2 * s) + M2 - 2 * M1) / den
    cancellation = (M2 - 2 * M1 - nu1 * A2 / (2 * s)) / den
    out = {}
    for name, nu2 in [('definition', definition), ('cancellation', cancellation)]:
        I1 = chart(lambda y: 2 * h1(y) * (-y - nu2) + h2(y) * (y - nu1), s)
        I2 = chart(lambda y: h2(y) * (nu2 + nu1), s)
        out[name] = (nu2, I1, I2, I1 / (2 * s - 1) + I2 / (2 * s))
    return A1, A2, M1, M2, out


if __name__ == '__main__':
    for s, a in [(0.6, 0.2), (0.75, 0.5), (0.9, 0.8), (0.5, 0.3), (0.75, 1.0), (0.25, 0.1)]:
        print(f"q({s},{a}) = {mp.nstr(q(mp.mpf(s), mp.mpf(a)), 17)}")
    print(f"q_line(0.5,0.3) = {mp.nstr(q_line(0.5, 0.3), 17)}")
    print(f"q_line(0.75,1.0) = {mp.nstr(q_line(0.75, 1.0), 17)}")
    for n, s in [(1, 0.5), (2, 0.75), (2, 0.25), (3, 0.5)]:
        print(f"A({n},{s}) = {mp.nstr(a_ns(n, mp.mpf(s)), 17)}")
    for s, nu in [(0.5, 1), (0.75, 2), (0.75, 6), (0.3, 0.5), (0.9, 1.5)]:
        s = mp.mpf(s)
        print(f"alpha0({s},{nu}) = {mp.nstr(alpha0(s, nu), 17)}  M0 = {mp.nstr(M0(s, nu), 17)}")
    print(f"A(2,0.5) = {mp.nstr(a_ns(2, mp.mpf('0.5')), 17)}")
    print(f"A(3,0.75) = {mp.nstr(a_ns(3, mp.mpf('0.75')), 17)}")
    print(f"avg(n=2,s=0.5, 1+y^2/(1+y^2)) = {mp.nstr(chart(lambda y: 1 + y*y/(1+y*y), mp.mpf('0.5')), 17)}")
    print(f"mom(n=2,s=0.75, 1+0.5y/(1+|y|)) = {mp.nstr(chart(lambda y: (1 + y/(2*(1+abs(y))))*y, mp.mpf('0.75')), 17)}")
    print(f"beta_tail(0.5,0.75) = {mp.nstr(beta_tail(mp.mpf('0.5'), mp.mpf('0.75')), 17)}")
    # direct half-plane integral of |y2|^0.3 |e2 - y|^(-2-1.2), y2 < 0
    hs = mp.quad(lambda y2: (-y2)**mp.mpf('0.3') * mp.quad(lambda y1: (y1*y1 + (1-y2)**2)**mp.mpf('-1.6'), [-mp.inf, 0, mp.inf]), [-mp.inf, -1, 0])
    print(f"halfspace(0.3,0.6,n=2,x=1) direct = {mp.nstr(hs, 17)}  closed = {mp.nstr(a_ns(2, mp.mpf('0.6'))*beta_tail(mp.mpf('0.3'), mp.mpf('0.6')), 17)}")
    for s, nu in [(0.75, 0.1), (0.6, 0.5)]:
        a0, m0, L1, M1 = profile_terms(s, nu)
        print(f"profile({s},{nu}): alpha0 = {mp.nstr(a0, 17)} M0 = {mp.nstr(m0, 17)} L1 = {mp.nstr(L1, 17)} M1 = {mp.nstr(M1, 17)}")
    A1, A2, M1, M2, out = anisotropic_instance()
    print(f"aniso: A1 = {mp.nstr(A1, 17)} A2 = {mp.nstr(A2, 17)} M1 = {mp.nstr(M1, 17)} M2 = {mp.nstr(M2, 17)}")
    for k, (nu2, I1, I2, c) in out.items():
        print(f"aniso {k}: nu2 = {mp.nstr(nu2, 17)} I1 = {mp.nstr(I1, 17)} I2 = {mp.nstr(I2, 17)} cancel = {mp.nstr(c, 17)}")
