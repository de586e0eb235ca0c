"""Figure registry sanity: ids, schema columns, axis-scale policy."""

from coopscatter_figures.specs import FIGURES, SEMILOG_FIGURES

# the harness CSV schema this package consumes (interface contract)
SCHEMAS = {
    "fig1": {"n", "lambda_over_N", "plateau_over_N"},
    "fig2": {"n", "omega_over_N", "ref_tan_over_N", "ref_cot_over_N"},
    "fig3": {
        "t_gamma",
        "mf_mean_beta2",
        "timed_dicke_beta2",
        "discrete_mean_beta2",
        "discrete_stderr_beta2",
    },
    "fig4": {
        "t_gamma",
        "mf_norm_beta2",
        "discrete_norm_beta2",
        "discrete_norm_stderr",
        "ref_superradiant",
        "ref_single_atom",
    },
    "fig5": {"n", "lambda_over_N", "plateau_over_N"},
    "fig6": {"n", "lambda_over_N", "continuum_over_N"},
    "fig7": {
        "t_gamma",
        "phase",
        "mf_mean_beta2",
        "discrete_mean_beta2",
        "discrete_stderr_beta2",
        "ref_single_atom",
    },
    "fig8": {
        "t_gamma",
        "phase",
        "mf_mean_beta2",
        "discrete_mean_beta2",
        "discrete_stderr_beta2",
        "ref_single_atom",
    },
    "fig9": {"t_gamma", "phase", "mf_power", "discrete_power", "discrete_stderr_power"},
}


def test_all_nine_figures_defined():
    assert set(FIGURES) == {f"fig{i}" for i in range(1, 10)}


def test_semilog_only_for_decay_figures():
    assert SEMILOG_FIGURES == {"fig4", "fig7", "fig8", "fig9"}


def test_every_referenced_column_exists_in_schema():
    for fig_id, spec in FIGURES.items():
        schema = SCHEMAS[fig_id]
        used = {spec.x_column}
        used.update(s.column for s in spec.series)
        used.update(s.err_column for s in spec.series if s.err_column)
        used.update(r.column for r in spec.references)
        assert used <= schema, f"{fig_id} uses columns outside the schema: {used - schema}"


def test_csv_names_match_ids():
    for fig_id, spec in FIGURES.items():
        assert spec.csv_name == f"{fig_id}.csv"
        assert spec.figure_id == fig_id


def test_reference_lines_cover_captions():
    assert len(FIGURES["fig1"].references) == 1
    assert len(FIGURES["fig2"].references) == 2
    assert len(FIGURES["fig4"].references) == 2  # superradiant + single-atom guides
    assert len(FIGURES["fig6"].references) == 1  # continuum curve
    assert len(FIGURES["fig7"].references) == 1
    assert len(FIGURES["fig8"].references) == 1
