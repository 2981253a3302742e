"""Frozen reference values.

Everything below except the closed forms was produced by ``oracle_gen.py``
(adaptive DOP853 + brentq, no package code involved) and pasted here.
"""

import math

# closed forms
PI2_4 = math.pi**2 / 4                      # lam_1 for N = 1 and mu_1(2): -v'' = lam v, cos(pi r / 2)
GELFAND_N1_THETA_STAR = 1.1996786402577433  # root of theta tanh(theta) = 1
GELFAND_N1_LAMBDA_STAR = 2 * GELFAND_N1_THETA_STAR**2 / math.cosh(GELFAND_N1_THETA_STAR) ** 2
GELFAND_N1_A_STAR = 2 * math.log(math.cosh(GELFAND_N1_THETA_STAR))

# first eigenvalues of the N-homogeneous problem
LAMBDA1 = {
    1: 2.4674011002723755,
    2: 2.736793634653122,
    3: 2.9152297164173877,
    4: 3.0436567916483708,
}
# mu_1(p) at non-integer p (same problem with exponent p - 1)
MU1 = {2.5: 2.6176287847578004, 4.7: 3.0090000622483535}

GELFAND_N2_A_STAR = 2.594693521794436
GELFAND_N2_LAMBDA_STAR = 1.9395471809253453
GELFAND_N2_LAMBDA_A1 = 1.3729455627426717
GELFAND_N2_MU1_A1 = 3.88981321804146        # linearized mu_1 at a = 1
POWER_DECAY_N2_LAMBDA_A3 = 8.693787761883648
POWER_DECAY_N2_MU1_A3 = 19.638743805854503   # linearized mu_1 at a = 3
RATIONAL_N2_LAMBDA_A1 = 3.48160625977141
