import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgetrace.bedrf import DIRICHLET, NEUMANN
from edgetrace.config import SimulationConfig
from edgetrace.sampler import Material

materials = st.dictionaries(
    st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True),
    st.builds(lambda bc, r, s: (bc, r, s), st.sampled_from([DIRICHLET, NEUMANN]),
              st.floats(0, 1), st.floats(0, 1)), max_size=3)


@given(st.integers(1, 10 ** 6), st.integers(0, 2 ** 31), st.booleans(), st.booleans(),
       st.floats(1.0, 1e3), st.floats(0.0, 2.0), st.sampled_from(["uniform", "proxy"]),
       materials)
def test_text_round_trip(samples, seed, mis, irr, co_star, absorption, emission, mats):
    cfg = SimulationConfig(samples=samples, seed=seed, mis=mis, irr=irr, co_star=co_star,
                           absorption=absorption, emission=emission,
                           materials={k: Material(k, *v) for k, v in mats.items()})
    assert SimulationConfig.from_text(cfg.to_text()) == cfg


def test_defaults():
    cfg = SimulationConfig()
    assert cfg.samples == 12000 and cfg.c == 344.0 and cfg.co_star == 100.0
    assert cfg.subpath_depth == 2
    assert cfg.bc_of_material() == {}


@pytest.mark.parametrize("kw", [dict(c=0.0), dict(samples=0), dict(emission="cone"),
                                dict(absorption=-1.0), dict(group_size=0)])
def test_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        SimulationConfig(**kw)


@pytest.mark.parametrize("text", ["[simulation]\nspeed = 3\n", "[other]\n",
                                  "[material.x]\nbc = soft\n"])
def test_rejects_bad_text(text):
    with pytest.raises(ValueError):
        SimulationConfig.from_text(text)


def test_from_file_and_replace(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[simulation]\nsamples = 500\nmis = false\n\n[material.wall]\nbc = dirichlet\n")
    cfg = SimulationConfig.from_file(p)
    assert cfg.samples == 500 and cfg.mis is False
    assert cfg.bc_of_material() == {"wall": DIRICHLET}
    assert cfg.replace(seed=4).seed == 4 and cfg.seed == 0
