from ciphermatch.core.app import App
from ciphermatch.commands.keys.keys_commands import KeysCommands


def setup(app: App) -> None:
    KeysCommands(app).register()
