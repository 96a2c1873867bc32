"""Three routers with a cyclic static table versus the same triangle under AODV."""

from btaodv.scenario import BUILTINS, build_simulation, parse_scenario


def show(name: str, until: float = 3000) -> None:
    sim = build_simulation(parse_scenario(BUILTINS[name]))
    r = sim.run_until(until)
    loss = r.loss
    print(f"{name:10s} sent={loss.sent} delivered={loss.received} drops={loss.dropped_by_reason or {}}")
    if loss.received:
        route = sim.states[0].route_table.get(10)
        if route is not None:
            print(f"{'':10s} host 0 reaches network 10 via router {route.next_hop} in {route.hop_count} hops")


if __name__ == "__main__":
    show("fig3-loop")
    show("fig3-aodv")
