"""Frozen fundamental coweight tables in the q-number shorthand.

Token grammar (products separated by '*', optional single '/' divisor):
  qN    [N]_T            qN_K  [N]_{T^K}
  wN    T^N + T^-N       1     the unit
Rows are the alpha_1..alpha_n coefficients of one fundamental coweight,
already multiplied by the row prefactor.
"""

E6_PREFIX = "q12"
E6 = [
    ["w3*q8", "w2*q6", "w2*w3*q5", "q4*q6", "q2*w3*q4", "w3*q4"],
    ["w2*q6", "w2*w3*q6", "q4*q6", "w2*q3*q6", "q4*q6", "w2*q6"],
    ["w2*w3*q5", "q4*q6", "w3*q4*q5", "w1*q4*q6", "q2*q2*w3*q4", "q2*w3*q4"],
    ["q4*q6", "w2*q3*q6", "q2*q4*q6", "q3*q4*q6", "q2*q4*q6", "q4*q6"],
    ["q2*w3*q4", "q4*q6", "q2*q2*w3*q4", "q2*q4*q6", "w3*q4*q5", "w2*w3*q5"],
    ["w3*q4", "w2*q6", "q2*w3*q4", "q4*q6", "w2*w3*q5", "w3*q8"],
]

E7_PREFIX = "w9"
E7 = [
    ["w3*w5", "w2*w3", "w3*q3_2", "w3*q4", "q6", "q2*w3", "w3"],
    ["w2*w3", "w3*q7/q2", "w3*q4", "w2*q6", "q3*q3_2", "q6", "q3_2"],
    ["w3*q3_2", "w3*q4", "w3*q6", "q2*w3*q4", "q2*q6", "q2*q2*w3", "q2*w3"],
    ["w3*q4", "w2*q6", "q2*w3*q4", "q4*q6", "q3*q6", "q2*q6", "q6"],
    ["q6", "q3*q3_2", "q2*q6", "q3*q6", "q3_2*q5", "w3*q5", "w3*q5/q2"],
    ["q2*w3", "q6", "q2*q2*w3", "q2*q6", "w3*q5", "q2*w3*w4", "w3*w4"],
    ["w3", "q3_2", "q2*w3", "q6", "w3*q5/q2", "w3*w4", "q3_4"],
]

E8_PREFIX = "w15"
E8 = [
    ["w5*q4_3", "w3*q5_2", "q2_3*w5*q7/q2", "w3*q10", "w3*q4*w5", "w5*q6", "q2*w3*w5", "w3*w5"],
    ["w3*q5_2", "w3*w5*q4_2", "w3*q10", "q3_2*q10", "w2*w5*q6", "q3*q3_2*w5", "w5*q6", "w5*q3_2"],
    ["q2_3*w5*q7/q2", "w3*q10", "q2_3*w5*q7", "q2*w3*q10", "q2*w3*q4*w5", "q2*w5*q6", "q2_2*q2_2*w3*w5", "q2*w3*w5"],
    ["w3*q10", "q3_2*q10", "q2*w3*q10", "q6*q10", "q4*w5*q6", "q3*w5*q6", "q2*w5*q6", "w5*q6"],
    ["w3*q4*w5", "w2*w5*q6", "q2*w3*q4*w5", "q4*w5*q6", "w2*w3*q10", "q3_2*q10", "w3*q10", "w3*q5_2"],
    ["w5*q6", "q3*q3_2*w5", "q2*w5*q6", "q3*w5*q6", "q3_2*q10", "w4*w5*q6", "q2*q2_3*w4*w5", "q2_3*w4*w5"],
    ["q2*w3*w5", "w5*q6", "q2*q2*w3*w5", "q2*w5*q6", "w3*q10", "q2*q2_3*w4*w5", "q2*q3_4*w5", "q3_4*w5"],
    ["w3*w5", "w5*q3_2", "q2*w3*w5", "w5*q6", "w3*q5_2", "q2_3*w4*w5", "q3_4*w5", "w5*w9"],
]

# F4: rows 1-2 carry the prefactor w3/w9, rows 3-4 carry 1/w9
F4_PREFIX = ["w9/w3", "w9/w3", "w9", "w9"]
F4 = [
    ["w5", "q3_2", "w2", "1"],
    ["q3_2", "q6", "q4", "q2"],
    ["w2*w3", "q4*w3", "q3_2*w2", "q3_2"],
    ["w3", "q2*w3", "q3_2", "w3*w4/q2"],
]

G2_PREFIX = ["w6/w2", "w6/w2"]
G2 = [
    ["q2/q3", "1"],
    ["1", "w3"],
]


def _token(t):
    from merotensor.cartan import t_number, t_symmetric

    if t == "1":
        return t_number(1)
    if t[0] == "w":
        return t_symmetric(int(t[1:]))
    if "_" in t:
        n, k = t[1:].split("_")
        return t_number(int(n)).substitute_power(int(k))
    return t_number(int(t[1:]))


def parse_entry(s):
    """'q2*w3/q2' -> (numerator, denominator) Laurent polynomials."""
    from functools import reduce

    num, _, den = s.partition("/")
    prod = lambda x: reduce(lambda a, b: a * b, [_token(u) for u in x.split("*")])
    return prod(num), (prod(den) if den else _token("1"))
