"""Figure definitions: which CSV, which columns, which styling.

One FigureSpec per experiment id, mapping the harness CSV schema verbatim to
a plot: data series, reference lines (plateaus and decay guides), axis scales
and labels.  Decay figures (fig4, fig7, fig8, fig9) are semilog-y; everything
else is linear.  This package never recomputes physics: reference lines are
columns the harness already wrote.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["SeriesSpec", "ReferenceSpec", "FigureSpec", "FIGURES", "SEMILOG_FIGURES"]


@dataclass(frozen=True)
class SeriesSpec:
    column: str
    label: str
    style: dict = field(default_factory=dict)
    err_column: str | None = None  # drawn as a shaded band when present


@dataclass(frozen=True)
class ReferenceSpec:
    column: str
    label: str
    style: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    csv_name: str
    x_column: str
    series: tuple
    references: tuple
    semilog_y: bool
    xlabel: str
    ylabel: str
    stems: bool = False  # spectra are drawn as stem-style markers per mode index


def _spectrum_fig(fig_id: str, plateau_label: str) -> FigureSpec:
    return FigureSpec(
        figure_id=fig_id,
        csv_name=f"{fig_id}.csv",
        x_column="n",
        series=(SeriesSpec("lambda_over_N", r"$\lambda_n/N$", {"color": "tab:gray"}),),
        references=(
            ReferenceSpec("plateau_over_N", plateau_label, {"color": "tab:blue", "linestyle": "--"}),
        ),
        semilog_y=False,
        xlabel="mode index $n$",
        ylabel=r"$\lambda_n/N$",
        stems=True,
    )


EXC_LABEL = r"$\langle|\beta|^2\rangle$  [$(\Omega_0/\Gamma)^2$]"

FIGURES: dict[str, FigureSpec] = {
    "fig1": _spectrum_fig("fig1", r"$3/2\sigma^2$"),
    "fig2": FigureSpec(
        figure_id="fig2",
        csv_name="fig2.csv",
        x_column="n",
        series=(SeriesSpec("omega_over_N", r"$\omega_n/N$", {"color": "tab:gray"}),),
        references=(
            ReferenceSpec(
                "ref_tan_over_N", r"$(3/4\sigma^2)\tan\sigma$", {"color": "tab:blue", "linestyle": "--"}
            ),
            ReferenceSpec(
                "ref_cot_over_N", r"$-(3/4\sigma^2)\cot\sigma$", {"color": "tab:red", "linestyle": "-."}
            ),
        ),
        semilog_y=False,
        xlabel="mode index $n$",
        ylabel=r"$\omega_n/N$",
        stems=True,
    ),
    "fig3": FigureSpec(
        figure_id="fig3",
        csv_name="fig3.csv",
        x_column="t_gamma",
        series=(
            SeriesSpec("mf_mean_beta2", "mean field", {"color": "tab:red"}),
            SeriesSpec(
                "timed_dicke_beta2", "Timed-Dicke", {"color": "tab:blue", "linestyle": "--"}
            ),
            SeriesSpec(
                "discrete_mean_beta2",
                "discrete",
                {"color": "black", "linestyle": "-."},
                err_column="discrete_stderr_beta2",
            ),
        ),
        references=(),
        semilog_y=False,
        xlabel=r"$\Gamma t$",
        ylabel=EXC_LABEL,
    ),
    "fig4": FigureSpec(
        figure_id="fig4",
        csv_name="fig4.csv",
        x_column="t_gamma",
        series=(
            SeriesSpec("mf_norm_beta2", "mean field", {"color": "tab:blue"}),
            SeriesSpec(
                "discrete_norm_beta2",
                "discrete",
                {"color": "black", "linestyle": "--"},
                err_column="discrete_norm_stderr",
            ),
        ),
        references=(
            ReferenceSpec(
                "ref_superradiant",
                r"$e^{-\lambda_N \Gamma t}$",
                {"color": "tab:red", "linestyle": "-."},
            ),
            ReferenceSpec(
                "ref_single_atom", r"$e^{-\Gamma t}$", {"color": "black", "linestyle": ":"}
            ),
        ),
        semilog_y=True,
        xlabel=r"$\Gamma t$",
        ylabel=r"$\langle|\beta|^2\rangle / \langle|\beta(0)|^2\rangle$",
    ),
    "fig5": _spectrum_fig("fig5", r"$5/2\sigma^2$"),
    "fig6": FigureSpec(
        figure_id="fig6",
        csv_name="fig6.csv",
        x_column="n",
        series=(SeriesSpec("lambda_over_N", r"$\lambda_n/N$", {"color": "tab:gray"}),),
        references=(
            ReferenceSpec(
                "continuum_over_N",
                r"$(1/2\sigma^2)e^{-(n+1/2)^2/2\sigma^2}$",
                {"color": "tab:red", "linestyle": "-"},
            ),
        ),
        semilog_y=False,
        xlabel="mode index $n$",
        ylabel=r"$\lambda_n/N$",
        stems=True,
    ),
    "fig7": FigureSpec(
        figure_id="fig7",
        csv_name="fig7.csv",
        x_column="t_gamma",
        series=(
            SeriesSpec("mf_mean_beta2", "mean field", {"color": "tab:red"}),
            SeriesSpec(
                "discrete_mean_beta2",
                "discrete",
                {"color": "tab:blue", "linestyle": "--"},
                err_column="discrete_stderr_beta2",
            ),
        ),
        references=(
            ReferenceSpec(
                "ref_single_atom", r"$e^{-\Gamma t}$", {"color": "black", "linestyle": ":"}
            ),
        ),
        semilog_y=True,
        xlabel=r"$\Gamma t$",
        ylabel=EXC_LABEL,
    ),
    "fig9": FigureSpec(
        figure_id="fig9",
        csv_name="fig9.csv",
        x_column="t_gamma",
        series=(
            SeriesSpec("mf_power", "mean field", {"color": "tab:red"}),
            SeriesSpec(
                "discrete_power",
                "discrete",
                {"color": "tab:blue", "linestyle": "--"},
                err_column="discrete_stderr_power",
            ),
        ),
        references=(),
        semilog_y=True,
        xlabel=r"$\Gamma t$",
        ylabel=r"$P/P_1$",
    ),
}

# fig8 shares fig7's layout; only the source CSV differs
FIGURES["fig8"] = FigureSpec(
    figure_id="fig8",
    csv_name="fig8.csv",
    x_column=FIGURES["fig7"].x_column,
    series=FIGURES["fig7"].series,
    references=FIGURES["fig7"].references,
    semilog_y=True,
    xlabel=FIGURES["fig7"].xlabel,
    ylabel=FIGURES["fig7"].ylabel,
)

SEMILOG_FIGURES = frozenset(fid for fid, spec in FIGURES.items() if spec.semilog_y)
