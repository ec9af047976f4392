"""Cluster model: hosts with GPUs and NIC ports, two-tier leaf/spine fabric.

Links are directed (one object per direction of a physical cable) so that
full-duplex traffic never self-contends. Path selection is static shortest
path by hop count with lowest-index tie-breaks; a "rail-optimized" fabric
attaches NIC index i of every host to the same leaf switch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .engine import SimulationError

GiB = 1 << 30
MiB = 1 << 20
KiB = 1 << 10


class UnknownPort(SimulationError):
    """Raised when a fault or lookup names a NIC port that does not exist."""


@dataclass
class Host:
    id: int
    gpus: List[int]
    nic_ports: List[str]
    cpu_proxy_count: int = 1


@dataclass
class Switch:
    id: str
    tier: str  # "leaf" | "spine"


@dataclass
class Link:
    id: str
    src: str
    dst: str
    capacity_bps: float
    delay_ns: int
    up: bool = True
    bytes_delivered: int = 0

    @property
    def capacity_bits_per_ns(self) -> float:
        return self.capacity_bps / 1e9


@dataclass
class TopologyConfig:
    hosts: int = 2
    gpus_per_host: int = 1
    nics_per_host: int = 2
    leaf_switches: int = 2
    spine_switches: int = 1
    link_capacity_bps: float = 400e9
    link_delay_ns: int = 1_000
    fabric_capacity_bps: Optional[float] = None  # leaf<->spine; defaults to 1:1
    fabric_delay_ns: int = 1_000
    intra_capacity_bps: float = 1600e9
    intra_delay_ns: int = 100
    rail_map: Optional[Dict[int, int]] = None  # nic index -> leaf index


class Topology:
    """Static cluster graph plus path/hop computation."""

    def __init__(self, cfg: TopologyConfig):
        self.cfg = cfg
        self.hosts: List[Host] = []
        self.switches: List[Switch] = []
        self.links: Dict[str, Link] = {}
        # port id -> (egress link, ingress link) to its leaf
        self.port_links: Dict[str, Tuple[Link, Link]] = {}
        self.rail_map: Dict[int, int] = dict(cfg.rail_map or {})
        self._build()

    # -- construction -----------------------------------------------------

    def _add_link(self, src: str, dst: str, cap: float, delay: int) -> Link:
        link_id = f"{src}->{dst}"
        link = Link(link_id, src, dst, cap, delay)
        self.links[link_id] = link
        return link

    def _build(self) -> None:
        cfg = self.cfg
        if cfg.leaf_switches < 1 or cfg.hosts < 1:
            raise SimulationError("topology needs at least one host and one leaf")
        for leaf in range(cfg.leaf_switches):
            self.switches.append(Switch(f"leaf{leaf}", "leaf"))
        for spine in range(cfg.spine_switches):
            self.switches.append(Switch(f"spine{spine}", "spine"))

        if not self.rail_map:
            self.rail_map = {i: i % cfg.leaf_switches for i in range(cfg.nics_per_host)}

        for h in range(cfg.hosts):
            ports = [f"h{h}.nic{n}" for n in range(cfg.nics_per_host)]
            self.hosts.append(Host(h, list(range(cfg.gpus_per_host)), ports))
            for n, port in enumerate(ports):
                leaf = f"leaf{self.rail_map[n]}"
                out = self._add_link(port, leaf, cfg.link_capacity_bps, cfg.link_delay_ns)
                inn = self._add_link(leaf, port, cfg.link_capacity_bps, cfg.link_delay_ns)
                self.port_links[port] = (out, inn)
            # shared intra-host fabric (NVLink-class), one per host
            self._add_link(f"h{h}.fab.a", f"h{h}.fab.b", cfg.intra_capacity_bps, cfg.intra_delay_ns)
            self._add_link(f"h{h}.fab.b", f"h{h}.fab.a", cfg.intra_capacity_bps, cfg.intra_delay_ns)

        fabric_cap = cfg.fabric_capacity_bps
        if fabric_cap is None:
            # 1:1 oversubscription: leaf uplink budget equals its host-port budget
            ports_per_leaf = max(
                1,
                (cfg.hosts * cfg.nics_per_host) // cfg.leaf_switches,
            )
            fabric_cap = cfg.link_capacity_bps * ports_per_leaf / max(1, cfg.spine_switches)
        for leaf in range(cfg.leaf_switches):
            for spine in range(cfg.spine_switches):
                self._add_link(f"leaf{leaf}", f"spine{spine}", fabric_cap, cfg.fabric_delay_ns)
                self._add_link(f"spine{spine}", f"leaf{leaf}", fabric_cap, cfg.fabric_delay_ns)

    # -- lookups -----------------------------------------------------------

    def host(self, host_id: int) -> Host:
        return self.hosts[host_id]

    def port_exists(self, port: str) -> bool:
        return port in self.port_links

    def leaf_of_port(self, port: str) -> str:
        if port not in self.port_links:
            raise UnknownPort(port)
        return self.port_links[port][0].dst

    def closest_nic(self, host_id: int, gpu: int) -> int:
        """Primary NIC for a GPU: minimal |nic - gpu| with lowest-index tie-break."""
        nics = range(self.cfg.nics_per_host)
        return min(nics, key=lambda n: (abs(n - gpu), n))

    def second_nic(self, host_id: int, gpu: int) -> int:
        """Backup NIC: the next-closest distinct port by the same metric."""
        if self.cfg.nics_per_host < 2:
            raise SimulationError("backup NIC requires at least two ports per host")
        primary = self.closest_nic(host_id, gpu)
        nics = [n for n in range(self.cfg.nics_per_host) if n != primary]
        return min(nics, key=lambda n: (abs(n - gpu), n))

    def port_name(self, host_id: int, nic: int) -> str:
        return f"h{host_id}.nic{nic}"

    # -- paths -------------------------------------------------------------

    def intra_path(self, host_id: int) -> List[Link]:
        return [self.links[f"h{host_id}.fab.a->h{host_id}.fab.b"]]

    def inter_path(self, src_port: str, dst_port: str) -> List[Link]:
        """NIC-to-NIC path: via one leaf when railed together, else leaf-spine-leaf."""
        if src_port not in self.port_links or dst_port not in self.port_links:
            raise UnknownPort(f"{src_port} or {dst_port}")
        out_link = self.port_links[src_port][0]
        in_link = self.port_links[dst_port][1]
        src_leaf, dst_leaf = out_link.dst, in_link.src
        if src_leaf == dst_leaf:
            return [out_link, in_link]
        spine = "spine0"  # static lowest-index tie-break
        up = self.links[f"{src_leaf}->{spine}"]
        down = self.links[f"{spine}->{dst_leaf}"]
        return [out_link, up, down, in_link]

    def path_between(self, src: Tuple[int, int], dst: Tuple[int, int]) -> List[Link]:
        """Path between (host, gpu) endpoints using each side's closest NIC."""
        (sh, sg), (dh, dg) = src, dst
        if sh == dh:
            return self.intra_path(sh)
        return self.inter_path(
            self.port_name(sh, self.closest_nic(sh, sg)),
            self.port_name(dh, self.closest_nic(dh, dg)),
        )

    def hop_count(self, src: Tuple[int, int], dst: Tuple[int, int]) -> int:
        """Number of switches traversed between two (host, gpu) endpoints."""
        (sh, _), (dh, _) = src, dst
        if sh == dh:
            return 0
        path = self.path_between(src, dst)
        switch_ids = {s.id for s in self.switches}
        hops = set()
        for link in path:
            if link.src in switch_ids:
                hops.add(link.src)
            if link.dst in switch_ids:
                hops.add(link.dst)
        return len(hops)

    def path_delay_ns(self, path: List[Link]) -> int:
        return sum(l.delay_ns for l in path)

    def spine_links(self) -> List[Link]:
        return [l for l in self.links.values() if l.src.startswith("spine") or l.dst.startswith("spine")]

    def reset_counters(self) -> None:
        for link in self.links.values():
            link.bytes_delivered = 0
