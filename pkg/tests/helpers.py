from src.games.efg import BehaviorProfile


def random_behavior_profile(game, rng):
    weights = [rng.random(game.num_sequences[p]) + 0.01 for p in (0, 1)]
    return BehaviorProfile.from_weights(game, *weights)


def follow(game, labels):
    """Node reached from the root along the given edge labels."""
    node = 0
    for label in labels:
        matches = [c for c in game.children(node) if game.labels[c] == label]
        assert matches, f"no edge {label!r} below node {node}"
        node = int(matches[0])
    return node
