"""Command-line client for the shapepose service.

Commands are thin wrappers over the service endpoints. By default the
service app runs in-process (no server needed); pass ``--server URL`` to
talk to a running instance instead, in which case file paths must be
valid on the server's filesystem.
"""

from __future__ import annotations

import json

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _post(ctx, path: str, payload: dict) -> dict:
    payload = {k: v for k, v in payload.items() if v is not None}
    with _client(ctx.obj.get("server")) as client:
        resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json()
            message = f"{detail.get('error', resp.status_code)}: {detail.get('detail', '')}"
        except (ValueError, json.JSONDecodeError):
            message = f"HTTP {resp.status_code}: {resp.text}"
        raise click.ClickException(message)
    return resp.json()


@click.group()
@click.option("--server", default=None, metavar="URL", help="Remote service URL (default: run in-process).")
@click.pass_context
def main(ctx, server):
    """6D pose estimation from silhouette matching."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--out", required=True, type=click.Path(), help="Workspace directory.")
@click.option("--views", default=200, type=click.IntRange(min=1), help="Views per shape library.")
@click.option("--zm", default=8.0, type=click.FloatRange(min_open=True, min=0), help="Library render distance.")
@click.option("--seed", default=0, type=int)
@click.option("--points", default=12000, type=click.IntRange(min=100), help="Points per procedural model.")
@click.option("--skip-libraries", is_flag=True, help="Write models/manifest only.")
@click.option("--threads", default=1, type=click.IntRange(min=1))
@click.pass_context
def init(ctx, out, views, zm, seed, points, skip_libraries, threads):
    """Create a demo workspace with procedural models and shape libraries."""
    data = _post(
        ctx,
        "/workspaces/init",
        {
            "out_dir": out,
            "n_views": views,
            "z_m": zm,
            "seed": seed,
            "points_per_model": points,
            "build_libraries": not skip_libraries,
            "threads": threads,
        },
    )
    click.echo(f"manifest: {data['manifest_path']}")
    click.echo(f"classes: {', '.join(data['classes'])}")


@main.command("build-shapelib")
@click.option("--model", required=True, type=click.Path(), help="Point-cloud file (.xyz or .ply).")
@click.option("--class-id", required=True, type=click.IntRange(min=0))
@click.option("--views", default=200, type=click.IntRange(min=1), help="Number of sphere views.")
@click.option("--zm", default=8.0, type=click.FloatRange(min_open=True, min=0), help="Render distance z_m.")
@click.option("--out", required=True, type=click.Path(), help="Output shape-library file.")
@click.option("--resolution", default="512x512", metavar="WxH", help="Library render resolution.")
@click.option("--focal", default=None, type=float, help="Focal length px (default: frame at 60%).")
@click.option("--splat-radius", default=2, type=click.IntRange(min=0))
@click.option("--signature-len", default=360, type=click.IntRange(min=8))
@click.option("--threads", default=1, type=click.IntRange(min=1))
@click.option("--verbose", is_flag=True, help="Print every per-view area.")
@click.pass_context
def build_shapelib(ctx, model, class_id, views, zm, out, resolution, focal,
                   splat_radius, signature_len, threads, verbose):
    """Render a view-sphere shape library for one object model."""
    try:
        w, h = (int(v) for v in resolution.lower().split("x"))
    except ValueError:
        raise click.UsageError(f"--resolution must look like 512x512, got {resolution!r}")
    data = _post(
        ctx,
        "/shape-libraries/build",
        {
            "model_path": model,
            "class_id": class_id,
            "n_views": views,
            "z_m": zm,
            "out_path": out,
            "splat_radius": splat_radius,
            "signature_len": signature_len,
            "resolution": [w, h],
            "focal_length": focal,
            "threads": threads,
        },
    )
    click.echo(
        f"wrote {data['out_path']}: {data['n_views']} views at z_m={data['z_m']}, "
        f"area min/mean/max = {data['area_min']}/{data['area_mean']:.1f}/{data['area_max']} px"
    )
    if verbose:
        for i, area in enumerate(data["areas"]):
            click.echo(f"view {i:3d}: area {area}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(), help="Workspace manifest.")
@click.option("--mask1", required=True, type=click.Path(), help="Camera-1 label map.")
@click.option("--mask2", default=None, type=click.Path(), help="Camera-2 label map (optional).")
@click.option("--out", default=None, type=click.Path(), help="Pose result file.")
@click.option("--top-k", default=None, type=click.IntRange(min=1), help="Hypotheses re-scored by camera 2.")
@click.option("--emit-cloud", is_flag=True, help="Also write the reconstructed cloud (XYZ).")
@click.option("--verbose", is_flag=True, help="Dump the cost of every library view.")
@click.pass_context
def estimate(ctx, manifest, mask1, mask2, out, top_k, emit_cloud, verbose):
    """Estimate the 6D pose of the largest segment in a label map."""
    data = _post(
        ctx,
        "/estimate",
        {
            "manifest_path": manifest,
            "mask1_path": mask1,
            "mask2_path": mask2,
            "out_path": out,
            "top_k": top_k,
            "emit_cloud": emit_cloud,
        },
    )
    click.echo(
        f"class {data['class_name']} (id {data['class_id']}), cost {data['cost']:.4f}"
        + (" [two-view]" if data["used_second_view"] else " [single-view]")
    )
    click.echo(
        f"x={data['x']:.4f} y={data['y']:.4f} z={data['z']:.4f} "
        f"theta1={data['theta1']:.1f} theta2={data['theta2']:.1f} theta3={data['theta3']:.1f}"
    )
    if data.get("out_path"):
        click.echo(f"pose file: {data['out_path']}")
    if data.get("cloud_path"):
        click.echo(f"cloud: {data['cloud_path']}")
    if verbose:
        for i, cost in enumerate(data["all_costs"]):
            click.echo(f"view {i:3d}: cost {cost:.6f}")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--per-class", default=20, type=click.IntRange(min=1), help="Scenes per object class.")
@click.option("--seed", default=0, type=int)
@click.option("--out", required=True, type=click.Path(), help="Dataset directory.")
@click.pass_context
def synth(ctx, manifest, per_class, seed, out):
    """Generate a synthetic two-camera benchmark dataset."""
    data = _post(
        ctx,
        "/datasets/generate",
        {
            "manifest_path": manifest,
            "n_per_class": per_class,
            "seed": seed,
            "out_dir": out,
        },
    )
    click.echo(f"wrote {data['n_scenes']} scenes to {data['out_dir']}")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--estimate-missing/--no-estimate-missing", default=True,
              help="Run estimation for scenes without a pose file.")
@click.option("--top-k", default=None, type=click.IntRange(min=1))
@click.option("--thresholds", default="0.10,0.15,0.20", help="Comma-separated diameter fractions.")
@click.argument("dataset_dir", type=click.Path())
@click.argument("results_dir", type=click.Path())
@click.pass_context
def evaluate(ctx, manifest, estimate_missing, top_k, thresholds, dataset_dir, results_dir):
    """Evaluate per-scene estimates against a dataset's ground truth."""
    try:
        fracs = [float(v) for v in thresholds.split(",") if v]
    except ValueError:
        raise click.UsageError(f"bad --thresholds {thresholds!r}")
    data = _post(
        ctx,
        "/evaluations/run",
        {
            "manifest_path": manifest,
            "dataset_dir": dataset_dir,
            "results_dir": results_dir,
            "thresholds": fracs,
            "estimate_missing": estimate_missing,
            "top_k": top_k,
        },
    )
    if data["missing"]:
        click.echo(f"warning: {len(data['missing'])} scenes without estimates: "
                   + ", ".join(data["missing"]), err=True)
    header = ["class", "n", "mean_adds", "stderr"] + [f"sr{round(100 * t)}" for t in fracs]
    click.echo("  ".join(f"{c:>10}" for c in header))
    for row in data["classes"]:
        cells = [
            f"{row['class_name']:>10}",
            f"{row['count']:>10}",
            f"{row['mean_adds']:>10.4f}",
            f"{row['stderr']:>10.4f}",
        ] + [f"{row['success_rates'][repr(t)]:>10.1f}" for t in fracs]
        click.echo("  ".join(cells))
    click.echo(f"results file: {data['results_path']}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the pose-estimation service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
