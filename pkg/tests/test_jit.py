import json
import os
import subprocess
import sys

import numpy as np
import pytest

from screwon import _jit, classical, elliptic, radial, wkb

SCRIPT = r"""
import json
import numpy as np
from screwon import JIT_ENABLED
from screwon.core import ModelParams
from screwon.elliptic import ellip_Pi
from screwon.wkb import quantize
from screwon.radial import RadialProblem, shoot_eigenvalues
from screwon.classical import integrate_darboux
p = ModelParams(lam=1.0, k=1.0, p_z=0.3, l=1)
print(json.dumps({
    "jit": JIT_ENABLED,
    "pi": ellip_Pi(0.3, 0.7),
    "wkb": list(quantize(p, [1, 5]).energies),
    "shoot": list(shoot_eigenvalues(RadialProblem.from_params(p), 2)),
    "orbit": list(integrate_darboux(np.array([0.7, -0.2, 0.1, 0.3, 0.4, 0.3]), p, 3.0).y[-1]),
}))
"""


def _run(no_jit):
    env = {**os.environ, "SCREWON_NO_JIT": "1" if no_jit else "0"}
    res = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True, env=env)
    assert res.returncode == 0, res.stderr
    return json.loads(res.stdout)


class TestKernelParity:
    @pytest.mark.parametrize("args", [(0.3, 1.2, 2.5), (1e-3, 4.0, 9.0), (0.0, 1.0, 1.0)])
    def test_carlson(self, args):
        for fn in (elliptic.rf, elliptic.rd):
            assert fn(*args) == pytest.approx(fn.py_func(*args), rel=1e-15)
        assert elliptic.rj(*args, 0.7) == pytest.approx(elliptic.rj.py_func(*args, 0.7), rel=1e-15)

    def test_action_kernels(self):
        ap = wkb.turning_points(wkb.ModelParams(lam=2.0, k=0.8, p_z=0.1, l=2), 30.0)
        tmb, tma, A1, p2 = -ap.cubic[0], -ap.cubic[1], ap.cubic[2], -ap.cubic[3]
        c, b, a = ap.roots
        jit = wkb._action_elliptic(A1, tma, tmb, p2, c, b, a)
        py = wkb._action_elliptic.py_func(A1, tma, tmb, p2, c, b, a)
        assert jit[0] == pytest.approx(py[0], rel=1e-14)
        assert wkb._action_trapezoid(tma, tmb, p2, b, a) == pytest.approx(
            wkb._action_trapezoid.py_func(tma, tmb, p2, b, a), rel=1e-14)

    def test_vector_fields(self):
        y = np.array([0.3, -0.1, 0.2, 0.5, 0.4, 0.1])
        p = classical.ModelParams(lam=1.5, k=0.7, m=1.2)
        for f, par in ((classical._darboux_f, classical._darboux_pars(p)),
                       (classical._ls_f, classical._ls_pars(p))):
            a, b = np.empty(6), np.empty(6)
            f(0.0, y, par, a)
            f.py_func(0.0, y, par, b)
            assert np.allclose(a, b, rtol=1e-15, atol=1e-16)

    def test_node_count(self):
        y = np.sin(np.linspace(0.01, 5 * np.pi - 0.01, 1000))
        assert radial._count_nodes(y) == radial._count_nodes.py_func(y) == 4

    def test_decorator_passthrough(self):
        fn = _jit.njit(lambda v: v + 1)
        assert fn(1) == 2 and fn.py_func(1) == 2


class TestPureFallback:
    def test_modes_agree(self):
        on, off = _run(False), _run(True)
        assert off["jit"] is False
        for key in ("pi", "wkb", "shoot", "orbit"):
            assert np.allclose(on[key], off[key], rtol=1e-12, atol=1e-14), key
