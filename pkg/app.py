# Fan power baseline estimation command line
import logging
import sys
from functools import wraps
from typing import Callable, List

import click

from config.baseline_config import BaselineConfig
from services.baseline import estimate_baseline, load_dataset, prepare_event_inputs, resolve_loss
from services.errors import BaselineError, BaselineInputError, InvalidConfigError
from services.evaluation import MethodSpec, run_study, write_estimate_reports, write_study_reports
from services.synth import generate, load_synth_config, write_synth_dataset
from services.tensor import FitOptions

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT, force=True)


def report_error(error: BaselineError) -> None:
    """Print one machine-parsable stderr line and exit with the error's status"""
    message = ' '.join(str(error).replace('"', "'").split())
    click.echo(f'error code={error.code} exit={error.exit_code} message="{message}"', err=True)
    sys.exit(error.exit_code)


def handle_errors(f: Callable) -> Callable:
    """Validate the environment configuration, then turn service errors into report_error lines"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            BaselineConfig.validate_config()
            return f(*args, **kwargs)
        except BaselineError as e:
            report_error(e)
        except OSError as e:
            report_error(BaselineInputError(f"{e.strerror or e}: {e.filename}" if e.filename else str(e)))
    return decorated_function


class BaselineGroup(click.Group):
    """Command group whose usage errors use the report_error format with exit status 1"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            report_error(InvalidConfigError(e.format_message()))
        except click.Abort:
            report_error(BaselineInputError("Aborted"))


def _split_list(value: str, cast=str, allowed=None) -> List:
    items = [item.strip() for item in value.split(',') if item.strip()]
    if not items:
        raise InvalidConfigError(f"Empty list '{value}'")
    try:
        items = [cast(item) for item in items]
    except ValueError:
        raise InvalidConfigError(f"Invalid list '{value}'")
    if allowed is not None:
        unknown = [item for item in items if item not in allowed]
        if unknown:
            raise InvalidConfigError(f"Unsupported values {unknown}, expected some of {allowed}")
    return items


def _check_resolution(resolution: int) -> int:
    if resolution not in BaselineConfig.SUPPORTED_RESOLUTIONS:
        raise InvalidConfigError(f"Resolution {resolution} not in {BaselineConfig.SUPPORTED_RESOLUTIONS}")
    return resolution


fit_options = [
    click.option('--rank', type=int, default=BaselineConfig.RANK, show_default=True, help='CP rank'),
    click.option('--trials', type=int, default=BaselineConfig.TRIALS, show_default=True, help='Random restarts'),
    click.option('--seed', type=int, default=BaselineConfig.SEED, show_default=True, help='Top-level seed'),
    click.option('--max-iterations', type=int, default=BaselineConfig.MAX_ITERATIONS, show_default=True),
    click.option('--delta', type=float, default=BaselineConfig.HUBER_DELTA, show_default=True,
                 help='Huber threshold (kW)'),
    click.option('--delta-scaled', type=float, default=None,
                 help='Set the Huber threshold to this fraction of the median day-mode power'),
    click.option('--threads', type=int, default=BaselineConfig.THREADS, show_default=True),
    click.option('--log-level', default=BaselineConfig.LOG_LEVEL, show_default=True),
]


def with_fit_options(f: Callable) -> Callable:
    for option in reversed(fit_options):
        f = option(f)
    return f


@click.group(cls=BaselineGroup)
def cli():
    """Fan power baselines for demand response by tensor completion"""


# ============================================================================
# ESTIMATE
# ============================================================================

@cli.command()
@click.option('--manifest', required=True, help='Dataset manifest (TOML)')
@click.option('--resolution', type=int, default=BaselineConfig.RESOLUTION_MINUTES, show_default=True,
              help='Slot length in minutes (1, 5, 15 or 30)')
@click.option('--mode', type=click.Choice(BaselineConfig.SUPPORTED_MODES), default=BaselineConfig.MODE,
              show_default=True)
@click.option('--loss', type=click.Choice(BaselineConfig.SUPPORTED_LOSSES), default=BaselineConfig.LOSS,
              show_default=True)
@click.option('--out', default='baseline_out', show_default=True, help='Output directory')
@with_fit_options
@handle_errors
def estimate(manifest, resolution, mode, loss, out, rank, trials, seed, max_iterations, delta,
             delta_scaled, threads, log_level):
    """Estimate the event-day baseline over each event window"""
    setup_logging(log_level)
    _check_resolution(resolution)

    dataset = load_dataset(manifest)
    tensor, mask, windows, event_day = prepare_event_inputs(dataset, resolution, mode)
    spec = resolve_loss(tensor, dataset, loss, delta, delta_scaled, mask)
    options = FitOptions.from_config(rank=rank, trials=trials, seed=seed,
                                     max_iterations=max_iterations, threads=threads)

    result = estimate_baseline(tensor, mask, spec, options, event_day, windows)
    run_config = {
        'building': dataset.meta.building,
        'event_day': dataset.meta.event_day.isoformat(),
        'resolution': resolution,
        'mode': mode,
        **spec.to_dict(),
        'delta_scaled': delta_scaled,
        **options.to_dict(),
    }
    paths = write_estimate_reports(result, out, run_config)

    for window in result.windows:
        kwh = float(window.baseline.sum()) * resolution / 60.0
        click.echo(f"{window.label}: baseline {kwh:.3f} kWh over {window.window.length} slots")
    click.echo(f"wrote {paths['baseline']} {paths['fit']}")


# ============================================================================
# STUDY
# ============================================================================

@cli.command()
@click.option('--manifest', required=True, help='Dataset manifest (TOML)')
@click.option('--methods', default=','.join(BaselineConfig.SUPPORTED_METHODS), show_default=True)
@click.option('--resolutions', default=str(BaselineConfig.RESOLUTION_MINUTES), show_default=True)
@click.option('--modes', default=BaselineConfig.MODE, show_default=True)
@click.option('--losses', default=BaselineConfig.LOSS, show_default=True)
@click.option('--nmbe-conventional/--nmbe-sample', default=BaselineConfig.NMBE_CONVENTIONAL_DIVISOR,
              help='Divide the NMBE bias by |tau| instead of |tau| - 1')
@click.option('--out', default='study_out', show_default=True, help='Output directory')
@with_fit_options
@handle_errors
def study(manifest, methods, resolutions, modes, losses, nmbe_conventional, out, rank, trials, seed,
          max_iterations, delta, delta_scaled, threads, log_level):
    """Leave-one-day-out cross-validation over a method x resolution grid"""
    setup_logging(log_level)
    methods = _split_list(methods, str, BaselineConfig.SUPPORTED_METHODS)
    resolutions = _split_list(resolutions, int, BaselineConfig.SUPPORTED_RESOLUTIONS)
    modes = _split_list(modes, str, BaselineConfig.SUPPORTED_MODES)
    losses = _split_list(losses, str, BaselineConfig.SUPPORTED_LOSSES)

    specs = []
    for method in methods:
        for resolution in resolutions:
            if method != 'tensor':
                specs.append(MethodSpec(method, resolution))
                continue
            for mode in modes:
                for loss in losses:
                    specs.append(MethodSpec(method, resolution, mode, loss, delta, delta_scaled))

    # Folds take the threads; each fit runs its trials serially
    options = FitOptions.from_config(rank=rank, trials=trials, seed=seed,
                                     max_iterations=max_iterations, threads=1)
    dataset = load_dataset(manifest)
    report = run_study(dataset, specs, options, threads, nmbe_conventional)

    run_config = {
        'building': dataset.meta.building,
        'methods': methods,
        'resolutions': resolutions,
        'modes': modes,
        'losses': losses,
        'delta': delta,
        'delta_scaled': delta_scaled,
        'nmbe_conventional_divisor': nmbe_conventional,
        **{k: v for k, v in options.to_dict().items() if k != 'threads'},
    }
    paths = write_study_reports(report, out, run_config)

    for row in report.aggregates():
        if row.metric == 'cv':
            click.echo(f"{row.method:8s} {row.resolution:>3d} min {row.mode:8s} {row.loss:5s} "
                       f"{row.window:10s} CV {row.mean:7.3f}% (n={row.n})")
    click.echo(f"wrote {paths['json']}")


# ============================================================================
# SYNTH
# ============================================================================

@cli.command()
@click.argument('config', required=False)
@click.option('--noise', type=float, default=None, help='Gaussian noise std (kW)')
@click.option('--outliers', type=int, default=None, help='Number of injected outliers')
@click.option('--seed', type=int, default=None)
@click.option('--event-day/--no-event-day', default=None, help='Treat the last day as an event day')
@click.option('--out', default='synth_out', show_default=True, help='Output directory')
@click.option('--log-level', default=BaselineConfig.LOG_LEVEL, show_default=True)
@handle_errors
def synth(config, noise, outliers, seed, event_day, out, log_level):
    """Generate a synthetic dataset with known low-rank structure"""
    setup_logging(log_level)
    synth_config = load_synth_config(config, noise_std=noise, outlier_count=outliers, seed=seed,
                                     with_event_day=event_day)
    dataset = generate(synth_config)
    paths = write_synth_dataset(dataset, synth_config, out)
    click.echo(f"wrote {paths['data']} {paths['manifest']}")
