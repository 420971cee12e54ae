"""padduet: a cooperative two-player rhythm engine.

Two players improvise on drum pads; the engine infers their shared beat,
meter, and downbeat phase, scores how well they are playing *together*,
and rewards them with generated harmonic accompaniment whose volume
tracks the interaction quality. The package splits into pure analysis
(:mod:`padduet.signals`, :mod:`padduet.scoring`), music generation
(:mod:`padduet.generator`), the deterministic session engine
(:mod:`padduet.session`), and a FastAPI service plus CLI on top.
"""

__version__ = "0.1.0"
