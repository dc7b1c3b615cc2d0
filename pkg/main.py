#!/usr/bin/env python3
"""
Graph Learning Network - Experiment Pipeline

Usage:
    python main.py run                        # gen -> train -> eval on the default community dataset
    python main.py gen --family surface --surface-kind torus
    python main.py train --preset desk        # train on a previously generated dataset
    python main.py eval --checkpoint PATH --baseline --noise-features
    python main.py depth-sweep --depth-values 1 2 3 4
    python main.py robustness --checkpoint PATH --proportions 0.1 0.5 1.0
    python main.py ablation --family figures
    python main.py predict --checkpoint PATH --sample-index 0 --noise-features
    python main.py replay output/runs/community_c2/train/manifest.json
"""

import argparse
import os
import sys

# Add project root to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def print_step(step_num, total_steps, message):
    """Print a formatted step message."""
    print(f"\n{'='*60}")
    print(f"Step {step_num}/{total_steps}: {message}")
    print('='*60)


def run_full_pipeline(cfg, args):
    """Generate the dataset, train on it, then evaluate the checkpoint."""
    from experiments.commands import cmd_eval, cmd_gen, cmd_train

    total_steps = 2 if args.skip_gen else 3
    current_step = 0

    if not args.skip_gen:
        current_step += 1
        print_step(current_step, total_steps, "Generating dataset")
        cmd_gen(cfg)

    current_step += 1
    print_step(current_step, total_steps, "Training")
    trained = cmd_train(cfg, args.dataset)

    current_step += 1
    print_step(current_step, total_steps, "Evaluating on the test split")
    cmd_eval(cfg, trained.checkpoint_paths[0], args.dataset, baseline=args.baseline)


def run_single_command(cfg, args):
    from experiments import commands

    print_step(1, 1, args.title)
    if args.command == "gen":
        commands.cmd_gen(cfg)
    elif args.command == "train":
        commands.cmd_train(cfg, args.dataset)
    elif args.command == "eval":
        commands.cmd_eval(cfg, args.checkpoint, args.dataset, split=args.split, baseline=args.baseline,
                          noise_features=args.noise_features)
    elif args.command == "depth-sweep":
        commands.cmd_depth_sweep(cfg, args.dataset, args.L_values)
    elif args.command == "robustness":
        commands.cmd_robustness(cfg, args.checkpoint, args.dataset, args.sweep_proportions)
    elif args.command == "ablation":
        commands.cmd_ablation(cfg, args.dataset)
    elif args.command == "predict":
        commands.cmd_predict(cfg, args.checkpoint, args.sample_index, args.dataset,
                             noise_features=args.noise_features)


def build_parser():
    from experiments.settings import add_config_arguments

    parser = argparse.ArgumentParser(
        description='Graph Learning Network - dataset generation, training and evaluation',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest='command', required=True)

    def command(name, title, help_text, dataset=True, checkpoint=False):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(title=title)
        if dataset:
            p.add_argument('--dataset', help='NDJSON dataset (default: the configured dataset under the output root)')
        if checkpoint:
            p.add_argument('--checkpoint', required=True, help='checkpoint JSON written by train')
        add_config_arguments(p)
        return p

    p = command('run', 'Full pipeline', 'gen, train and eval in one go')
    p.add_argument('--skip-gen', action='store_true', help='Reuse an existing dataset')
    p.add_argument('--baseline', action='store_true', help='Also score the untrained model')

    command('gen', 'Generating dataset', 'generate a dataset', dataset=False)
    command('train', 'Training', 'train a model on the training split')

    p = command('eval', 'Evaluating checkpoint', 'score a checkpoint', checkpoint=True)
    p.add_argument('--split', choices=['test', 'all'], default='test')
    p.add_argument('--baseline', action='store_true', help='Also score the untrained model')
    p.add_argument('--noise-features', action='store_true', help='Also score the model on Gaussian noise features')

    p = command('depth-sweep', 'Sweeping recurrent depth', 'MMD versus number of layers')
    p.add_argument('--L', dest='L_values', type=int, nargs='+', metavar='L',
                   help='Depths to train (default: the depth_values config key)')

    p = command('robustness', 'Sweeping initial connection proportion', 'MMD versus random initial adjacency',
                checkpoint=True)
    p.add_argument('--p', dest='sweep_proportions', type=float, nargs='+', metavar='P',
                   help='Proportions to evaluate (default: the proportions config key)')

    command('ablation', 'Loss ablation', 'train the six loss variants on figures')

    p = command('predict', 'Dumping prediction', 'write one sample\'s predicted graph', checkpoint=True)
    p.add_argument('--sample-index', type=int, required=True)
    p.add_argument('--noise-features', action='store_true', help='Replace features by Gaussian noise')

    p = sub.add_parser('replay', help='re-run a command from its manifest')
    p.add_argument('manifest', help='manifest.json written by any command')
    p.add_argument('--output-dir', help='write outputs here instead of the recorded directory')
    return parser


def main():
    parser = build_parser()
    args = parser.parse_args()

    # Import after parsing args (lazy import for --help)
    from experiments.settings import config_from_args, dataset_name

    print("="*60)
    print("GRAPH LEARNING NETWORK")
    print("="*60)
    print(f"Command: {args.command}")

    try:
        if args.command == 'replay':
            from experiments.commands import replay
            print_step(1, 1, "Replaying manifest")
            replay(args.manifest, args.output_dir)
            return

        cfg = config_from_args(args)
        print(f"Dataset: {dataset_name(cfg.dataset)} ({cfg.dataset.num_samples} samples)")
        print(f"Model: L={cfg.model.layers}, d={cfg.model.hidden_dim}, k={cfg.model.kernels}, "
              f"epsilon={cfg.model.epsilon}")
        print(f"Optimizer: lr={cfg.optim.learning_rate}, epochs={cfg.optim.epochs}")
        print(f"Seeds: data={cfg.seeds.data_seed}, init={cfg.seeds.init_seed}, shuffle={cfg.seeds.shuffle_seed}")
        print(f"Output root: {cfg.output_dir}")
        print(f"Workers: {cfg.workers}")

        if args.command == 'run':
            run_full_pipeline(cfg, args)
        else:
            run_single_command(cfg, args)
    except KeyboardInterrupt:
        print("\n\nPipeline interrupted by user.")
        sys.exit(1)
    except Exception as e:
        print(f"\n\nError: {e}")
        raise


if __name__ == '__main__':
    main()
