"""
config: write or show the settings file
"""

from cli.output import emit, to_json
from core.config_manager import Settings


def register(subparsers, common):
    parser = subparsers.add_parser("config", parents=[common], help="settings file")
    actions = parser.add_subparsers(dest="action", metavar="ACTION", required=True)

    p = actions.add_parser("init", parents=[common], help="write the default settings")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(handler=run_init)

    p = actions.add_parser("show", parents=[common], help="print the effective settings")
    p.set_defaults(handler=run_show)


def run_init(args, ctx) -> int:
    path = ctx.config.config_path
    if path.exists() and not args.force:
        print(f"{path} already exists (use --force to overwrite)")
        return 0
    if not ctx.config.save_config(Settings()):
        return 3
    emit(ctx, f"wrote {path}", {"path": str(path)})
    return 0


def run_show(args, ctx) -> int:
    data = {"path": str(ctx.config.config_path), "settings": ctx.config.as_dict()}
    emit(ctx, [f"# {ctx.config.config_path}", to_json(ctx.config.as_dict())], data)
    return 0
