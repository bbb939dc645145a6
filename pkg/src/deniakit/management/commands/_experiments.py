"""
Experiment handler for deniakit.

This module is called via the deniakit command:
    deniakit channel validate example1
    deniakit zeroinfo example2 --side tx
    deniakit region tx example2 --out frontier.csv
    deniakit simulate transmitter example2 --n 3 --rate 1 --deniability 0.6667
    deniakit rerun frontier.csv.manifest.toml

Not meant to be called directly.

Design decisions:
- Every run with --out writes its outputs atomically plus a TOML run manifest
- Outputs carry no timestamps and no paths, so replaying a manifest gives the same bytes
- Without --out, region and simulate print their CSV or JSON to stdout and nothing else
- Library errors propagate; the command maps them to exit codes
"""

import logging
from dataclasses import asdict, replace

import numpy as np

from deniakit.channel import (
    Dmc,
    Party,
    channel_digest,
    degrading_witness,
    marginal,
    resolve_channel,
)
from deniakit.codec import (
    Setting,
    build_binning_codebook,
    build_iid_codebook,
    build_superposition_codebook,
    codebook_digest,
    dump_codebook,
)
from deniakit.evalx import FakeConfig, evaluate, monte_carlo
from deniakit.exceptions import NotDegradedError, RegionError, ReproducibilityError, UsageError
from deniakit.outputs import format_number, to_json, write_atomic
from deniakit.probkit import Pmf, uniform
from deniakit.regions import (
    MESSAGE_CONFIG,
    OptimizerConfig,
    closed_form_region,
    default_grid,
    max_deniability,
    message_region,
    receiver_region,
    region_csv,
    region_inclusion_check,
    transmitter_region,
    write_region_csv,
)
from deniakit.zeroinfo import zero_info_partition

from .run_manifest import ManifestManager, RunConfig, effective_options

logger = logging.getLogger(__name__)

# Closed-form region of each region kind, for the erasure example
CLOSED_FORM_KINDS = {'message': 'Rm', 'eq': 'Req', 'bcc': 'Rbcc'}

CODEBOOK_SUFFIX = '.codebook.json'


class ExperimentHandler:
    """Runs deniakit experiments and records their manifests"""

    def __init__(self, stdout, style):
        """
        Initialize experiment handler.

        Args:
            stdout: Output stream for writing messages
            style: Django command style object for colored output
        """
        self.stdout = stdout
        self.style = style

    # =========================================================================
    # UTILITIES
    # =========================================================================

    def load_channel(self, options):
        return resolve_channel(options.get('channel'), options.get('bec'))

    def write_table(self, title, d):
        """Print the rows of a DMC with its symbol names"""
        self.stdout.write(title)
        self.stdout.write('    ' + ' '.join(d.out_names))
        for name, row in zip(d.in_names, d.rows):
            self.stdout.write(f'  {name}: ' + ' '.join(format_number(v) for v in row))

    def dmc_payload(self, d):
        return {'in': list(d.in_names), 'out': list(d.out_names), 'p': d.rows.tolist()}

    def write_json(self, options, payload):
        """Write a JSON payload to --out when one is given"""
        if not options.get('out'):
            return {}
        return {'json': write_atomic(options['out'], to_json(payload))}

    def run(self, command, subcommand, cli_args, saved=None):
        """
        Run one command and save its manifest when it writes files.

        Returns:
            RunConfig: the effective options, digests and outputs of the run.
        """
        options = effective_options(command, cli_args, saved)
        run = RunConfig(command=command, subcommand=subcommand, options=options)
        handlers = {
            'channel': self.run_channel,
            'zeroinfo': self.run_zeroinfo,
            'region': self.run_region,
            'simulate': self.run_simulate,
        }
        outputs = handlers[command](subcommand, options, run)

        if options.get('out'):
            run.record_outputs(outputs)
            manifest = ManifestManager(out=options['out']).save(run)
            self.stdout.write(self.style.SUCCESS(f'✓ Manifest saved to {manifest}'))
        return run

    # =========================================================================
    # CHANNEL
    # =========================================================================

    def run_channel(self, subcommand, options, run):
        ch = self.load_channel(options)
        digest = channel_digest(ch)
        run.digests['channel'] = digest

        if subcommand == 'validate':
            self.stdout.write(
                self.style.SUCCESS(f'ok: |X|={ch.x_size} |Y|={ch.y_size} |Z|={ch.z_size}, digest {digest}')
            )
            payload = {
                'ok': True,
                'digest': digest,
                'sizes': [ch.x_size, ch.y_size, ch.z_size],
            }
        elif subcommand == 'marginals':
            bob, judy = marginal(ch, Party.BOB), marginal(ch, Party.JUDY)
            self.write_table('Bob P(y|x)', bob)
            self.write_table('Judy P(z|x)', judy)
            payload = {'bob': self.dmc_payload(bob), 'judy': self.dmc_payload(judy)}
        elif subcommand == 'degraded':
            try:
                witness, exact = degrading_witness(ch, tol=options['degraded_tol'])
            except NotDegradedError:
                self.stdout.write(self.style.ERROR('degraded: no'))
                raise
            self.stdout.write(self.style.SUCCESS('degraded: yes'))
            self.stdout.write('law factorises as P(y|x) P(z|y)' if exact else 'fitted degrading map')
            self.write_table('witness P(z|y)', witness)
            payload = {'degraded': True, 'factorised': exact, 'witness': self.dmc_payload(witness)}
        else:
            raise UsageError(f'Unknown channel subcommand: {subcommand}')

        return self.write_json(options, payload)

    # =========================================================================
    # ZERO-INFORMATION PARTITIONS
    # =========================================================================

    def run_zeroinfo(self, subcommand, options, run):
        ch = self.load_channel(options)
        run.digests['channel'] = channel_digest(ch)
        side = options['side']
        if side == 'tx':
            d = marginal(ch, Party.JUDY)
        elif side == 'rx':
            # raises NotDegradedError when no P(z|y) exists
            d, _ = degrading_witness(ch, tol=options['degraded_tol'])
        else:
            raise UsageError(f'Unknown side: {side} (choose tx or rx)')

        part = zero_info_partition(d, options['tol'])
        self.stdout.write(' '.join(part.names(d.in_names)))
        payload = {
            'side': side,
            'classes': [[d.in_names[w] for w in cls] for cls in part.classes],
            'row_tol': part.row_tol,
        }
        return self.write_json(options, payload)

    # =========================================================================
    # REGIONS
    # =========================================================================

    def run_region(self, kind, options, run):
        p = options.get('bec')
        if kind in ('eq', 'bcc') and p is None:
            raise UsageError(f'the {kind} region is computed in closed form for the erasure example; pass --bec P')

        if options.get('closed_form') or kind in ('eq', 'bcc'):
            boundary = self.closed_form(kind, p, options)
        else:
            boundary = self.optimised_region(kind, p, options)
        run.digests['channel'] = boundary.channel_digest

        if not options.get('out'):
            self.stdout.write(region_csv(boundary), ending='')
            return {}

        csv_path, sidecar = write_region_csv(boundary, options['out'])
        self.stdout.write(
            self.style.SUCCESS(f'✓ {len(boundary.points)} frontier points written to {csv_path} ({boundary.bound})')
        )
        if boundary.infeasible:
            self.stdout.write(
                self.style.WARNING(f'  ⚠ {len(boundary.infeasible)} grid points above the largest deniability omitted')
            )
        return {'csv': csv_path, 'witnesses': sidecar}

    def closed_form(self, kind, p, options):
        if p is None:
            raise UsageError('closed forms exist for the erasure example only; pass --bec P')
        if kind not in CLOSED_FORM_KINDS:
            raise UsageError(f'no closed form for the {kind} region')
        return closed_form_region(p, CLOSED_FORM_KINDS[kind], default_grid(p, options['grid']))

    def optimised_region(self, kind, p, options):
        ch = self.load_channel(options)
        base = MESSAGE_CONFIG if kind == 'message' else OptimizerConfig()
        if options.get('restarts') is None:
            options['restarts'] = base.restarts
        if options.get('max_iter') is None:
            options['max_iter'] = base.max_iter
        cfg = replace(
            base,
            restarts=options['restarts'],
            max_iter=options['max_iter'],
            seed=options['seed'],
            threads=options['threads'],
        )
        caps = tuple(options['caps']) if options.get('caps') else None

        # the erasure example shares its grid with the closed forms
        if p is not None:
            d_grid = default_grid(p, options['grid'])
        else:
            d_max = max_deniability(
                ch, kind, cfg, row_tol=options['tol'], degraded_tol=options['degraded_tol'], caps=caps
            )
            d_grid = default_grid(d_max, options['grid'])

        if kind == 'tx':
            boundary = transmitter_region(ch, d_grid, cfg, row_tol=options['tol'])
        elif kind == 'rx':
            boundary = receiver_region(
                ch, d_grid, cfg, row_tol=options['tol'], degraded_tol=options['degraded_tol']
            )
        elif kind == 'message':
            boundary = message_region(ch, d_grid, caps, cfg, degraded_tol=options['degraded_tol'])
        else:
            raise UsageError(f'Unknown region kind: {kind}')

        if options.get('check_inclusion'):
            if kind != 'message' or p is None:
                raise UsageError('--check-inclusion compares the message region with its erasure closed form; pass --bec P')
            closed = closed_form_region(p, 'Rm', boundary.grid)
            if not region_inclusion_check(boundary, closed):
                raise RegionError('optimizer frontier exceeds the closed-form message region')
            logger.info(f'message region for p={p} lies inside its closed form')
        return boundary

    # =========================================================================
    # SIMULATION
    # =========================================================================

    def build_codebook(self, setting, ch, options):
        n, seed = options['n'], options['seed']
        if n < 1:
            raise UsageError(f'blocklength must be at least 1, got {n}')

        if setting is Setting.MESSAGE:
            # constant V, U = X uniform
            aux = (
                Pmf([1.0]),
                Dmc(uniform(ch.x_size).probs[None, :]),
                Dmc(np.eye(ch.x_size)),
            )
            bits = (options['s_bits'], options['t_bits'], options['r_bits'])
            return build_binning_codebook(ch, aux, n, tuple(b / n for b in bits), seed)

        if setting is Setting.TRANSMITTER:
            part = zero_info_partition(marginal(ch, Party.JUDY), options['tol'])
            law = options.get('cloud_law')
            p_u = Pmf(law) if law else uniform(part.size)
            if p_u.support_size != part.size:
                raise UsageError(f'--cloud-law needs {part.size} probabilities, one per class')
            members = part.indicator().T
            p_x_given_u = Dmc(members / members.sum(axis=1, keepdims=True))
            return build_superposition_codebook(
                p_u,
                p_x_given_u,
                part,
                n,
                options['rate'],
                options['deniability'],
                seed,
                distinct=bool(options.get('distinct')),
            )

        return build_iid_codebook(uniform(ch.x_size), n, options['rate'], seed)

    def run_simulate(self, setting, options, run):
        ch = self.load_channel(options)
        setting = Setting(setting)
        cb = self.build_codebook(setting, ch, options)
        cfg = FakeConfig(
            procedure=options.get('fake'),
            decoder=options['decoder'],
            eps=options['eps'],
            row_tol=options['tol'],
            degraded_tol=options['degraded_tol'],
        )

        report = evaluate(setting, cb, ch, cfg)
        options['fake'] = report.procedure
        run.digests.update(channel=channel_digest(ch), codebook=codebook_digest(cb))

        payload = report.to_dict()
        payload['channel_digest'] = run.digests['channel']
        payload['codebook_digest'] = run.digests['codebook']
        payload['rates'] = dict(cb.rates or {})
        if options.get('trials'):
            estimate = monte_carlo(cb, ch, options['trials'], options['seed'], cfg.decoder, cfg.eps)
            payload['monte_carlo'] = asdict(estimate)

        if not options.get('out'):
            self.stdout.write(to_json(payload), ending='')
            return {}

        out = options['out']
        outputs = {
            'report': write_atomic(out, to_json(payload)),
            'codebook': write_atomic(f'{out}{CODEBOOK_SUFFIX}', to_json(dump_codebook(cb, ch.x_names))),
        }
        self.stdout.write(self.style.SUCCESS(f'✓ {setting} setting, n={cb.n}, {cb.messages} messages'))
        self.stdout.write(f'  error probability  {format_number(report.error_prob)}')
        self.stdout.write(f'  plausibility KL    {format_number(report.kl_plausibility)}')
        self.stdout.write(f'  deniability rate   {format_number(report.deniability_rate)}')
        if report.bounds_hold:
            self.stdout.write(self.style.SUCCESS('  ✓ equivocation and lemma bounds hold'))
        else:
            self.stdout.write(self.style.WARNING('  ⚠ some bound checks failed, see the report'))
        return outputs

    # =========================================================================
    # RERUN
    # =========================================================================

    def rerun(self, options):
        """Replay a manifest and compare the bytes written with the recorded digests"""
        saved = ManifestManager(manifest_file=options['manifest']).load()
        self.stdout.write(self.style.SUCCESS(f'=== Replaying {saved.command} {saved.subcommand or ""} ===\n'))
        run = self.run(saved.command, saved.subcommand, {'out': options.get('out')}, saved=saved.options)

        if saved.digests.get('channel') and run.digests.get('channel') != saved.digests['channel']:
            self.stdout.write(self.style.WARNING('  ⚠ channel differs from the recorded one'))
        mismatched = [
            role for role, digest in sorted(saved.output_digests.items())
            if run.output_digests.get(role) != digest
        ]
        if mismatched:
            raise ReproducibilityError(f'rerun wrote different bytes for: {", ".join(mismatched)}')
        self.stdout.write(self.style.SUCCESS('✓ Reproduced byte-identical outputs'))
        return run
