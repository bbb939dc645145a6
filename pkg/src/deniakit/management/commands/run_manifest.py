"""
Run manifests for reproducible batch runs.

Handles resolving, saving and loading the effective options of a run with TOML
persistence. A manifest records every option with its effective value
(defaults made explicit), the digests of the inputs and the sha256 of every
file the run wrote, so `deniakit rerun` can replay and verify it.
Requires Python 3.11+ for tomllib.
"""

import hashlib
import math
import tomllib
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings

from deniakit.channel import DEFAULT_DEGRADED_TOL
from deniakit.codec import DEFAULT_EPS
from deniakit.exceptions import UsageError
from deniakit.outputs import write_atomic
from deniakit.regions import DEFAULT_GRID_POINTS
from deniakit.zeroinfo import DEFAULT_ROW_TOL

MANIFEST_SUFFIX = '.manifest.toml'

# Default option values, used when neither the command line, a manifest nor
# settings.DENIAKIT provide one
DEFAULT_SEED = 0
DEFAULT_THREADS = 1
DEFAULT_SIDE = 'tx'
DEFAULT_BLOCKLENGTH = 3
DEFAULT_RATE = 1.0
DEFAULT_DENIABILITY = 0.0
DEFAULT_S_BITS = 1
DEFAULT_T_BITS = 1
DEFAULT_R_BITS = 0
DEFAULT_DECODER = 'ml'

# settings.DENIAKIT key -> option name
SETTING_KEYS = {
    'SEED': 'seed',
    'THREADS': 'threads',
    'ROW_TOL': 'tol',
    'DEGRADED_TOL': 'degraded_tol',
    'EPS': 'eps',
    'GRID': 'grid',
    'RESTARTS': 'restarts',
    'MAX_ITER': 'max_iter',
}

# Options recorded in the manifest of each command
COMMAND_OPTIONS = {
    'channel': ('channel', 'bec', 'degraded_tol', 'out'),
    'zeroinfo': ('channel', 'bec', 'side', 'tol', 'degraded_tol', 'out'),
    'region': (
        'channel', 'bec', 'closed_form', 'check_inclusion', 'grid', 'threads', 'seed',
        'tol', 'degraded_tol', 'restarts', 'max_iter', 'caps', 'out',
    ),
    'simulate': (
        'channel', 'bec', 'n', 'rate', 'deniability', 's_bits', 't_bits', 'r_bits',
        'cloud_law', 'fake', 'decoder', 'eps', 'distinct', 'trials', 'seed', 'tol',
        'degraded_tol', 'out',
    ),
}


def library_defaults():
    """Module defaults overridden by settings.DENIAKIT."""
    defaults = {
        'seed': DEFAULT_SEED,
        'threads': DEFAULT_THREADS,
        'tol': DEFAULT_ROW_TOL,
        'degraded_tol': DEFAULT_DEGRADED_TOL,
        'eps': DEFAULT_EPS,
        'grid': DEFAULT_GRID_POINTS,
        'side': DEFAULT_SIDE,
        'n': DEFAULT_BLOCKLENGTH,
        'rate': DEFAULT_RATE,
        'deniability': DEFAULT_DENIABILITY,
        's_bits': DEFAULT_S_BITS,
        't_bits': DEFAULT_T_BITS,
        'r_bits': DEFAULT_R_BITS,
        'decoder': DEFAULT_DECODER,
    }
    configured = getattr(settings, 'DENIAKIT', {})
    for key, name in SETTING_KEYS.items():
        if configured.get(key) is not None:
            defaults[name] = configured[key]
    return defaults


def effective_options(command, cli_args, saved=None):
    """
    Merge option sources for one command.

    Priority: CLI args > manifest > settings.DENIAKIT > module defaults

    Args:
        command: top-level command name.
        cli_args: Dict of parsed command line options (None means not given).
        saved: Options loaded from a manifest, if any.

    Returns:
        dict: Every option the command records, with None for the ones that stay unset.
    """
    if command not in COMMAND_OPTIONS:
        raise UsageError(f'Unknown command: {command}')
    options = library_defaults()
    if saved:
        options.update({k: v for k, v in saved.items() if v is not None})
    options.update({k: v for k, v in cli_args.items() if v is not None})
    return {name: options.get(name) for name in COMMAND_OPTIONS[command]}


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunConfig:
    """Everything needed to replay a run."""

    command: str
    subcommand: str | None = None
    options: dict = field(default_factory=dict)
    digests: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    output_digests: dict = field(default_factory=dict)

    def record_outputs(self, paths):
        self.outputs = {role: str(path) for role, path in paths.items()}
        self.output_digests = {role: file_digest(path) for role, path in paths.items()}


def _toml_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return repr(value)
    if isinstance(value, str):
        # Escape quotes and backslashes
        escaped = value.replace('\\', '\\\\').replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_toml_value(v) for v in value) + ']'
    raise UsageError(f'cannot store {type(value).__name__} in a run manifest')


class ManifestManager:
    """Reads and writes run manifests."""

    def __init__(self, manifest_file=None, out=None):
        """
        Initialize ManifestManager.

        Args:
            manifest_file: Path to the manifest. Defaults to `<out>.manifest.toml`.
            out: Output path of the run the manifest belongs to.
        """
        if manifest_file:
            self.manifest_file = Path(manifest_file)
        elif out:
            self.manifest_file = Path(f'{out}{MANIFEST_SUFFIX}')
        else:
            raise UsageError('a manifest needs either a file name or an output path')

    def load(self):
        """
        Load a run manifest.

        Returns:
            RunConfig

        Raises:
            UsageError: the file is missing or is not a deniakit manifest.
        """
        if not self.manifest_file.exists():
            raise UsageError(f'manifest {self.manifest_file} does not exist')
        try:
            with open(self.manifest_file, 'rb') as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise UsageError(f'manifest {self.manifest_file} is not valid TOML: {e}') from e
        if data.get('command') not in COMMAND_OPTIONS:
            raise UsageError(f'manifest {self.manifest_file} names no known command')
        return RunConfig(
            command=data['command'],
            subcommand=data.get('subcommand'),
            options=dict(data.get('options', {})),
            digests=dict(data.get('digests', {})),
            outputs=dict(data.get('outputs', {})),
            output_digests=dict(data.get('output_digests', {})),
        )

    def save(self, run):
        """
        Save a run manifest (simple writer for one level of tables).

        Args:
            run: RunConfig to save.

        Returns:
            Path of the manifest.
        """
        lines = [
            '# deniakit run manifest',
            '# Auto-generated - replay with: deniakit rerun <this file>',
            '',
            f'command = {_toml_value(run.command)}',
        ]
        if run.subcommand:
            lines.append(f'subcommand = {_toml_value(run.subcommand)}')

        tables = (
            ('options', run.options),
            ('digests', run.digests),
            ('outputs', run.outputs),
            ('output_digests', run.output_digests),
        )
        for name, table in tables:
            # Remove None values
            table = {k: v for k, v in table.items() if v is not None}
            if not table:
                continue
            lines += ['', f'[{name}]']
            for key, value in sorted(table.items()):
                lines.append(f'{key} = {_toml_value(value)}')

        return write_atomic(self.manifest_file, '\n'.join(lines) + '\n')
