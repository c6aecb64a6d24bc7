"""
presets: list and show experiment presets
"""

from cli.output import emit, to_json
from core.errors import InputFileError
from core.preset_manager import PresetManager


def register(subparsers, common):
    parser = subparsers.add_parser("presets", parents=[common], help="experiment presets")
    actions = parser.add_subparsers(dest="action", metavar="ACTION", required=True)

    p = actions.add_parser("list", parents=[common], help="list built-in and custom presets")
    p.set_defaults(handler=run_list)

    p = actions.add_parser("show", parents=[common], help="print a preset's experiment config")
    p.add_argument("key")
    p.set_defaults(handler=run_show)


def run_list(args, ctx) -> int:
    presets = PresetManager.get_all_presets(ctx.config.get_presets_folder())
    emit(ctx, [f"{key}: {p['name']} - {p['description']}" for key, p in presets.items()],
         {key: {"name": p["name"], "description": p["description"]} for key, p in presets.items()})
    return 0


def run_show(args, ctx) -> int:
    config = PresetManager.get_preset(args.key, ctx.config.get_presets_folder())
    if config is None:
        raise InputFileError(f"unknown preset {args.key!r}")
    data = config.model_dump(exclude_none=True)
    emit(ctx, to_json(data), data)
    return 0
