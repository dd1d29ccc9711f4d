from typing import Optional

import click

from arborlat import formats
from arborlat.labelled import OrbitStructure, TreeBall
from arborlat.permkernel import PermGroup
from arborlat.schemas import CommandConfig
from arborlat.settings import settings
from arborlat.utils import logger


class App(object):
    """
    Per-process state of a CLI run: the validated command configuration, the loaded inputs and
    the report lines written so far.
    """
    def __init__(self):
        self.config: Optional[CommandConfig] = None
        self.groups: dict[str, PermGroup] = dict()
        self.orbits: dict[str, OrbitStructure] = dict()
        self.lines: list[str] = []

    def configure(self, seed: Optional[int], cap_vertices: Optional[int], cap_group: Optional[int]):
        self.config = CommandConfig(subcommand='', seed=settings.SEED if seed is None else seed,
                                    cap_vertices=cap_vertices, cap_group=cap_group)
        settings.SEED = self.config.seed
        if cap_vertices is not None:
            settings.CAP_VERTICES = cap_vertices
        if cap_group is not None:
            settings.CAP_GROUP = cap_group

    def command(self, name: str, radius: int = None, output: str = None, **inputs):
        """
        Record the subcommand and its inputs; pydantic validates the radius.
        """
        base = self.config.dict() if self.config else dict(seed=settings.SEED)
        base.update(subcommand=name, radius=radius, output=output,
                    inputs={k: str(v) for k, v in inputs.items() if v is not None})
        self.config = CommandConfig(**base)
        logger.stage(f'{name} {" ".join(f"{k}={v}" for k, v in self.config.inputs.items())}'.strip())
        return self.config

    def group(self, path: str) -> PermGroup:
        if path not in self.groups:
            self.groups[path] = formats.read_group(path)
        return self.groups[path]

    def orbit_structure(self, path: Optional[str]) -> Optional[OrbitStructure]:
        if path is None:
            return None
        if path not in self.orbits:
            self.orbits[path] = formats.read_orbits(path)
        return self.orbits[path]

    def ball(self, path: str, orbits: str = None) -> TreeBall:
        return formats.read_ball(path, self.orbit_structure(orbits))

    def emit(self, text: str):
        for line in text.split('\n'):
            self.lines.append(line)
            click.echo(line)


app = App()
