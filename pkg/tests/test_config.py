import re
import textwrap

import pytest

from nonlocal_waves.config import (
    OUTPUT_ROOT_ENV,
    ConfigError,
    default_config,
    emit_config,
    load_config,
    parse_config,
    set_initial_param,
)
from nonlocal_waves.models import ModelId

CH = textwrap.dedent("""\
    [run]
    seed = 3

    [model]
    id = b_family
    b = 2

    [grid]
    kind = circle
    n = 128

    [initial.u]
    generator = random-band-limited
    kmax = 8
    amplitude = 0.05

    [control]
    dt = 1e-3
    t_end = 0.1
    record_every = 10

    [diagnostics]
    names = mass_u, h1_energy

    [output]
    directory = runs/ch
""")


def test_parse_fields():
    cfg = parse_config(CH)
    assert cfg.model.id is ModelId.B_FAMILY and cfg.model.b == 2.0
    assert cfg.grid.n == 128 and cfg.grid.extent == 1.0
    assert cfg.initial[0].kwargs() == {"kmax": 8, "amplitude": 0.05}
    assert cfg.control.dt == 1e-3 and cfg.control.record_every == 10
    assert cfg.diagnostics == ("mass_u", "h1_energy")
    assert cfg.seed == 3


def test_round_trip_is_byte_identical():
    once = emit_config(parse_config(CH))
    assert emit_config(parse_config(once)) == once
    for model in ("boussinesq", "modified_euler_poisson", "pi_ch", "fornberg_whitham"):
        text = emit_config(default_config(model))
        assert emit_config(parse_config(text)) == text


def test_emitted_floats_are_exact():
    text = emit_config(set_initial_param(parse_config(CH), "amplitude", 0.1 + 0.2))
    assert parse_config(text).initial[0].kwargs()["amplitude"] == 0.1 + 0.2


@pytest.mark.parametrize("mutate, where", [
    (lambda s: s.replace("n = 128", "n = 100"), "[grid]"),
    (lambda s: s.replace("n = 128", "n = lots"), "[grid] n"),
    (lambda s: s.replace("kmax = 8", "kmax = 8\ncolour = red"), "[initial.u]"),
    (lambda s: s.replace("h1_energy", "pich_energy"), "[diagnostics]"),
    (lambda s: s.replace("id = b_family", "id = kdv"), "[model] id"),
    (lambda s: s.replace("dt = 1e-3", "cfl_safety = 0.5\ndt = 1e-3"), "[control]"),
    (lambda s: s + "\n[plots]\nx = 1\n", "[plots]"),
    (lambda s: s + "\n[initial.rho]\ngenerator = zero\n", "[initial.rho]"),
    (lambda s: s.replace("t_end = 0.1\n", ""), "[control] missing"),
])
def test_errors_name_the_offending_key(mutate, where):
    with pytest.raises(ConfigError, match=re.escape(where)):
        parse_config(mutate(CH))


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line"):
        parse_config("[model]\nid = b_family\nnot a key value pair\n", source="x.ini")


def test_pi_ch_requires_circle():
    text = "[model]\nid = pi_ch\n[grid]\nkind = line\nn = 64\nextent = 10\n[control]\nt_end = 1\ndt = 0.1\n"
    with pytest.raises(ConfigError, match="circle"):
        parse_config(text)


def test_output_root_override(tmp_path, monkeypatch):
    cfg = parse_config(CH)
    monkeypatch.delenv(OUTPUT_ROOT_ENV, raising=False)
    assert str(cfg.output_path()) == "runs/ch"
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
    assert cfg.output_path() == tmp_path / "runs/ch"


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_set_initial_param_unknown():
    with pytest.raises(ConfigError):
        set_initial_param(parse_config(CH), "delta", 0.1)
