import gmpy2
import pytest
from hypothesis import HealthCheck, settings

from bethe_overlap.scalars import ParamSet, Scalar

settings.register_profile(
    "suite", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile("suite")

E = Scalar.exact


def exq(fr) -> Scalar:
    """Fraction (or int) to an exact Scalar."""
    return Scalar.exact(gmpy2.mpq(fr.numerator, fr.denominator)) \
        if hasattr(fr, "numerator") else Scalar.exact(fr)


def pset(*vals) -> ParamSet:
    return ParamSet([E(v) for v in vals])


@pytest.fixture
def tmp_json(tmp_path):
    """Write a dict as JSON, return the path as str."""
    import json

    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return write
