"""Python access to the hpcserve core: profiles, planning, rendering, sweeps and reports."""

from ._hpcserve import (
    BenchPoint,
    BenchSeries,
    Error,
    compare,
    emit_plot_data,
    load_catalog,
    load_platform_profile,
    load_series,
    load_site_profile,
    main,
    min_gpus,
    parse_bench_output,
    parse_plot_data,
    parse_series,
    plan,
    render_deploy,
    render_fetch,
    render_push,
    render_query,
    render_ray_job,
    resolve_spec,
    summarize,
    sweep_concurrencies,
)

__all__ = [
    "BenchPoint",
    "BenchSeries",
    "Error",
    "compare",
    "emit_plot_data",
    "load_catalog",
    "load_platform_profile",
    "load_series",
    "load_site_profile",
    "main",
    "min_gpus",
    "parse_bench_output",
    "parse_plot_data",
    "parse_series",
    "plan",
    "render_deploy",
    "render_fetch",
    "render_push",
    "render_query",
    "render_ray_job",
    "resolve_spec",
    "summarize",
    "sweep_concurrencies",
]
