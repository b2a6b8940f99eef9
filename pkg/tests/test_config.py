import pytest

from llrp.config import PRESETS, SearchConfig, preset


def test_defaults():
    cfg = SearchConfig()
    assert (cfg.mutation_prob, cfg.mutation_length, cfg.alpha, cfg.gamma, cfg.epsilon,
            cfg.window, cfg.delta) == (0.1, 2, 0.2, 0.85, 0.7, 4, 20)
    assert cfg.pop_size == 20 and cfg.max_generations == 5000
    assert cfg.replace_threshold == 1000 and cfg.memory_size == 3000 and cfg.psi == 0.55


def test_round_trip(tmp_path):
    cfg = SearchConfig(seed=9, crossover="ox", time_limit=3.5)
    path = tmp_path / "c.txt"
    path.write_text(cfg.dumps())
    assert SearchConfig.load(path) == cfg


def test_loads_comments_and_none():
    cfg = SearchConfig.loads("# hi\nalpha = 0.3  # note\ntarget = None\n")
    assert cfg.alpha == 0.3 and cfg.target is None


def test_unknown_key():
    with pytest.raises(ValueError, match="line 1"):
        SearchConfig.loads("nope = 1\n")


@pytest.mark.parametrize("kw", [{"crossover": "pmx"}, {"alpha": 2.0}, {"pop_size": 0},
                                {"time_limit": -1.0}])
def test_validation(kw):
    with pytest.raises(ValueError):
        SearchConfig(**kw)


def test_fingerprint_ignores_seed():
    assert SearchConfig(seed=1).fingerprint() == SearchConfig(seed=2).fingerprint()
    assert SearchConfig().fingerprint() != preset("rlhea4").fingerprint()


def test_presets():
    assert preset("rlhea4").vnd_order == "fixed"
    assert preset("rlhea1").crossover == "ox"
    assert preset("rlhea6").oscillation == "fixed_beta"
    assert preset("RLHEA", seed=3).seed == 3
    assert len(PRESETS) == 7
    with pytest.raises(ValueError):
        preset("rlhea9")


def test_fingerprint_shows_switches():
    fp = preset("rlhea4").fingerprint()
    assert "vnd_order=fixed" in fp and "," not in fp
