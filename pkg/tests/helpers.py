"""Helpers shared by the test modules."""


def catalog_metric(store, entry_id, **values):
    """Build a catalogued metric with the given rational parameter values."""
    return store.build_metric(store.get(entry_id), {k: str(v) for k, v in values.items()})


def catalog_subspace(store, entry_id, **values):
    """(subspace, displayed phi, pairing) of a catalogued subspace."""
    return store.build_subspace(store.get(entry_id), {k: str(v) for k, v in values.items()})
