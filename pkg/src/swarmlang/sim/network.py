"""Range-limited situated broadcast with independent message dropping.

Each message sent by robot i reaches each in-range robot j iff an
independent Bernoulli(1 - P) draw succeeds for that (message, receiver)
pair.  The receiver senses the sender's true relative position (distance
in centimeters, azimuth, elevation 0 for ground robots).  Draws are
consumed in a fixed order (sender ascending, message order, receiver
ascending) so a run is reproducible regardless of host parallelism.
"""

from ..wire import Situated, decode_message


def deliver(drop_prob, topology, outboxes, rng):
    """Route one step's outboxes; returns per-robot inbox lists."""
    n = len(outboxes)
    inboxes = [[] for _ in range(n)]
    total = 0
    for i, outbox in enumerate(outboxes):
        total += len(outbox) * len(topology.out_links[i])
    if total == 0:
        return inboxes
    draws = rng.random(total)
    k = 0
    for i, outbox in enumerate(outboxes):
        links = topology.out_links[i]
        if not links or not outbox:
            k += len(outbox) * len(links)
            continue
        for sent in outbox:
            # decode once per message: every receiver gets the same bytes
            sender_id, msg = decode_message(sent.raw)
            for j, dist_cm, azimuth in links:
                if draws[k] >= drop_prob:
                    inboxes[j].append(Situated(sender_id, dist_cm, azimuth,
                                               0.0, msg))
                k += 1
    return inboxes
