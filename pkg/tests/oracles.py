"""Hand-coded reference values, written from the closed forms without using
the package. Constants are re-typed here on purpose."""
import math

F_C, B, MU = 10e9, 400e6, 0.9
F_S1 = MU * B              # 360e6
F_S2 = 4096 * 120e3        # 491.52e6
K = 8


def dac():
    return 1.5e-5 * 2 ** 8 + 1.5e-12 * 8 * 5e9


def adc():
    return 70e-15 * 5e9 * 2 ** 8


def mixer():
    return 2.5e-13 * F_C


def phase_shifter():
    return 3.5e-11 * B


def lna():
    return 2.7e-11 * B


def pa(p, p_max=0.1, eta=0.15, alpha=0.75, xi=0.1):
    return xi * p_max ** alpha / eta + (1 - xi) * p_max ** (1 - alpha) * p ** alpha / eta


def ifft_ops(q=4096):
    return 1.5 * math.log2(q)


def combiner(m_rf, k=K):
    return math.ceil(m_rf / 32) * 1.0 + F_S1 * m_rf * 2 * k / 200e9


def precoder(m_rf, k=K, ups=math.inf):
    return math.ceil(m_rf / 32) * 1.0 + F_S1 * m_rf * (2 * k + (k ** 3 / (3 * m_rf) + 3 * k ** 2 + k) / ups) / 200e9


def fft(m_rf):
    return 0.1 + F_S2 * m_rf * ifft_ops() / 2000e9


def dpd(m_rf):
    return 0.1 + F_S2 * m_rf * 50 / 2000e9


def bb_filter(m_rf):
    return math.ceil(m_rf / 32) * 1.0 + F_S2 * m_rf * 20 * 4 / 200e9


def encoder(r_over_b):
    return 0.1 + F_S1 * (14 / 24) * r_over_b / 2000e9


def decoder(r_over_b):
    return 0.1 + F_S1 * (175 / 6) * r_over_b / 2000e9


def analog_dl(m_rf, m_ps):
    return 0.04 + m_rf * (2 * dac() + 2 * 0.005 + 2 * mixer() + m_ps * phase_shifter())


def analog_ul(m_rf, m_ps):
    return 0.04 + m_rf * (2 * adc() + 2 * 0.005 + 2 * mixer() + m_ps * phase_shifter() + lna())


def pa_frame_average(x_dl, p_a=0.1):
    tau, tau_sig, zeta = 0.75, 1 / 14, 1 / 12
    return (x_dl * tau * pa(p_a) + tau * tau_sig * pa(zeta * 0.1)
            + tau * (1 - x_dl) * (1 - tau_sig) * pa(0) * 0.5 + (1 - tau) * pa(0) * 0.25)


def total(m_rf, x, r_dl=0.0, r_ul=0.0, m_ant=1024):
    """Whole consumption with equal DL/UL load ``x``, signaling in "full" mode."""
    m_ps = 0 if m_rf == m_ant else m_ant // m_rf
    out = 0.0
    for tau, dig, ana in (
        (0.75, encoder(r_dl / 360e6) + precoder(m_rf, ups=14 * 3300) + fft(m_rf) + dpd(m_rf) + bb_filter(m_rf),
         analog_dl(m_rf, m_ps)),
        (0.25, decoder(r_ul / 360e6) + combiner(m_rf) + fft(m_rf) + bb_filter(m_rf), analog_ul(m_rf, m_ps)),
    ):
        w_active = x * tau + tau / 14
        w_micro = tau * (1 - x) * (1 - 1 / 14)
        w_idle = 1 - tau
        out += dig * (w_active + 0.5 * w_micro + 0.25 * w_idle) / 0.8
        out += ana * (w_active + 0.75 * w_micro + 0.5 * w_idle) / 0.8
    return out + m_ant * pa_frame_average(x, 100 * m_ant / 1024 / m_ant) / 0.8
