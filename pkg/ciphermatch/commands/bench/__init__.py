from ciphermatch.core.app import App
from ciphermatch.commands.bench.bench_commands import BenchCommands


def setup(app: App) -> None:
    BenchCommands(app).register()
