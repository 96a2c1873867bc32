import pytest

from btaodv.topology import Scatternet


@pytest.fixture
def migrated_net() -> Scatternet:
    """The 20-node, three-piconet layout after node 1 joined P3 and P2."""
    net = Scatternet()
    net.add_piconet(1, [2, 3, 4, 5, 6, 7, 8], "P1")
    net.add_piconet(12, [13, 14, 15, 16, 8, 11], "P2")
    net.add_piconet(17, [18, 19, 0, 9, 10, 11], "P3")
    net.migrate_as_slave(1, "P3")
    net.migrate_as_slave(1, "P2")
    return net
