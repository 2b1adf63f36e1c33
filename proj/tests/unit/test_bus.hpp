#pragma once

#include "psdn/pubsub/participant.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace psdn::testing {

/// Minimal broadcast medium for participant tests: unicast goes to the
/// owner of the destination address, multicast to every other station.
class TestBus {
public:
    class Port : public pubsub::Transport {
    public:
        Port(TestBus &bus, std::string address) : _bus(bus), _address(std::move(address)) {}
        void               send(dataplane::Packet packet) override { _bus.send(*this, std::move(packet)); }
        const std::string &address() const override { return _address; }

        pubsub::DomainParticipant *participant = nullptr;
        std::vector<dataplane::Packet> sent;

    private:
        TestBus    &_bus;
        std::string _address;
    };

    TestBus(sim::Kernel &kernel, sim::Duration latency = 10) : _kernel(kernel), _latency(latency) {
        _entity = kernel.register_entity("bus", [this](const sim::Event &e) {
            const auto &[port, packet] = std::any_cast<const std::pair<Port *, dataplane::Packet> &>(e.payload);
            if (port->participant != nullptr) {
                port->participant->on_packet(packet);
            }
        });
    }

    Port &port(const std::string &address) {
        auto &p = _ports[address];
        if (!p) {
            p = std::make_unique<Port>(*this, address);
        }
        return *p;
    }

    std::size_t packets() const noexcept { return _packets; }

private:
    void send(Port &from, dataplane::Packet packet) {
        ++_packets;
        from.sent.push_back(packet);
        if (pubsub::is_multicast(packet.dst_addr)) {
            for (auto &[addr, p] : _ports) {
                if (p.get() != &from) {
                    _kernel.schedule(_entity, _latency, sim::EventKind::PacketArrival, std::pair<Port *, dataplane::Packet>{p.get(), packet});
                }
            }
        } else if (auto it = _ports.find(packet.dst_addr); it != _ports.end()) {
            _kernel.schedule(_entity, _latency, sim::EventKind::PacketArrival, std::pair<Port *, dataplane::Packet>{it->second.get(), packet});
        }
    }

    sim::Kernel                                   &_kernel;
    sim::Duration                                  _latency;
    sim::EntityId                                  _entity;
    std::map<std::string, std::unique_ptr<Port>>   _ports;
    std::size_t                                    _packets = 0;
};

} // namespace psdn::testing
