from ocpad.utils.seeding import derive_seed, rng_for, splitmix64

__all__ = ['derive_seed', 'rng_for', 'splitmix64']
