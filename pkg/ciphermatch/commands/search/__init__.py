from ciphermatch.core.app import App
from ciphermatch.commands.search.search_commands import SearchCommands


def setup(app: App) -> None:
    SearchCommands(app).register()
