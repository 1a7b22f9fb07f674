"""dB/dBm conversion helpers.

All internal computation runs in linear units (Watts); config files may
specify powers in dBm and these helpers convert at load time.
"""

import numpy as np

LN2 = float(np.log(2.0))


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watts(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p_w):
    return 10.0 * np.log10(p_w) + 30.0
