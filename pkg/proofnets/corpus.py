"""
The generated part of the fixture directory: literature nets, encoded
integers and lists, and a few λ-derivations.
"""
import logging

from . import builders, lambda_calculus as lam, sdnll
from .proofnet import serialize_net

logger = logging.getLogger(__name__)


def corpus_nets():
    nets = {
        "duplication": builders.duplication_net(),
        "principal": builders.principal_net(),
        "dig_chain": builders.dig_chain_net(3),
        "not_polynomial": builders.not_polynomial_net(3),
        "nat_3": sdnll.encode_nat(3),
        "nat_2_s1": sdnll.encode_nat(2, 1, 0, 0),
        "binlist_101": sdnll.encode_binlist("101"),
        "ml4_nat_2": sdnll.ml4_nat(2, boxed=True),
    }
    for n in range(1, 7):
        nets[f"exp_n{n}"] = builders.exp_net(n)
        nets[f"expb_n{n}"] = builders.expb_net(n)
    return nets


def corpus_derivations():
    two = lam.nat_derivation(2)
    return {
        "add": lam.add_derivation(),
        "pair": lam.pair_derivation(lam.nat_derivation(1), lam.nat_derivation(0)),
        "add_two_two": lam.apply_derivation(lam.apply_derivation(lam.add_derivation(), two), two),
    }


def write_corpus(folder):
    """
    Write every corpus net as ``<name>.pn`` and every derivation as
    ``<name>.drv`` into ``folder``; files shipped by hand are left alone.

    Returns:
        (number of nets, number of derivations)
    """
    folder.mkdir(parents=True, exist_ok=True)
    nets, derivations = corpus_nets(), corpus_derivations()
    for name, net in nets.items():
        (folder / f"{name}.pn").write_text(serialize_net(net), encoding="utf-8")
    for name, d in derivations.items():
        (folder / f"{name}.drv").write_text(lam.format_derivation(d) + "\n", encoding="utf-8")
    logger.info("corpus written to %s", folder)
    return len(nets), len(derivations)
