"""Agreement between the compiled stepping core and the NumPy fallback.

When the extension is unavailable (or disabled with KSWAVE_NO_EXT=1) only
the fallback is importable and the cross-checks skip themselves.
"""

import subprocess
import sys

import numpy as np
import pytest

from kswave.backend import active_backend, available_backends
from kswave.cauchy import initial_gaussian_plateau
from kswave.core import Field, grid_make
from kswave.elliptic import solve_v
from kswave.errors import BlowUpError

BACKENDS = available_backends()
needs_both = pytest.mark.skipif(
    "compiled" not in BACKENDS, reason="compiled extension not built")


def _initial(n=401, d=1.0):
    g = grid_make(0.0, 80.0, n)
    u = initial_gaussian_plateau(g)
    v = solve_v(u, d)
    return g, u.values, v.values


class TestSelection:
    def test_active_backend_is_available(self):
        assert active_backend() in BACKENDS

    def test_python_fallback_always_present(self):
        assert "python" in BACKENDS
        assert BACKENDS["python"].BACKEND_NAME == "python"

    def test_env_var_disables_extension(self):
        # a fresh interpreter with KSWAVE_NO_EXT=1 must fall back
        code = ("import os; os.environ['KSWAVE_NO_EXT'] = '1'; "
                "from kswave.backend import active_backend; "
                "print(active_backend())")
        out = subprocess.run([sys.executable, "-c", code],
                             capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"


@needs_both
class TestAgreement:
    @pytest.mark.parametrize("chi,d", [
        (0.0, 1.0), (1.0, 1.0), (5.0, 1.0), (-2.0, 0.25), (3.0, 4.0),
    ])
    def test_long_run_agreement(self, chi, d):
        g, u0, v0 = _initial(d=d)
        dt = g.dx ** 2 / 10.0
        results = {}
        for name, mod in BACKENDS.items():
            results[name] = mod.advance(u0, v0, 2000, g.dx, dt, chi, d,
                                        True, True)
        du = np.max(np.abs(results["compiled"][0] - results["python"][0]))
        dv = np.max(np.abs(results["compiled"][1] - results["python"][1]))
        assert du < 1e-12
        assert dv < 1e-12

    @pytest.mark.parametrize("react,advect", [(False, False), (True, False),
                                              (False, True)])
    def test_term_switches_agree(self, react, advect):
        g, u0, v0 = _initial()
        dt = g.dx ** 2 / 10.0
        out = {name: mod.advance(u0, v0, 500, g.dx, dt, 2.0, 1.0,
                                 react, advect)
               for name, mod in BACKENDS.items()}
        assert np.max(np.abs(out["compiled"][0] - out["python"][0])) < 1e-12

    @pytest.mark.filterwarnings("ignore:overflow encountered")
    def test_blow_up_parity(self):
        # both cores must fail at the same step with the same report
        g = grid_make(0.0, 10.0, 21)
        u0 = np.full(g.n, -10.0)
        v0 = solve_v(Field(g, u0), 1.0).values
        reports = {}
        for name, mod in BACKENDS.items():
            with pytest.raises(BlowUpError) as err:
                mod.advance(u0, v0, 10000, g.dx, 0.1, 0.0, 1.0, True, True)
            reports[name] = (err.value.t, err.value.node)
        assert reports["compiled"] == reports["python"]

    def test_inputs_not_mutated(self):
        g, u0, v0 = _initial()
        u_copy, v_copy = u0.copy(), v0.copy()
        for mod in BACKENDS.values():
            mod.advance(u0, v0, 10, g.dx, g.dx ** 2 / 10.0, 1.0, 1.0,
                        True, True)
        assert np.array_equal(u0, u_copy)
        assert np.array_equal(v0, v_copy)
