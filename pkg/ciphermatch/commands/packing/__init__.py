from ciphermatch.core.app import App
from ciphermatch.commands.packing.packing_commands import PackingCommands


def setup(app: App) -> None:
    PackingCommands(app).register()
