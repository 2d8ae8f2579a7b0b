from ciphermatch.core.app import App
from ciphermatch.commands.simulate.simulate_commands import SimulateCommands


def setup(app: App) -> None:
    SimulateCommands(app).register()
