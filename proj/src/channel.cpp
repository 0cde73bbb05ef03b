#include "role_engine/role_playing.hpp"

namespace role_engine {

const ChannelEntry* ChannelSnapshot::find(const std::string& agent_id) const {
    const auto it = roles.find(agent_id);
    return it == roles.end() ? nullptr : &it->second;
}

SharedChannel::SharedChannel() : current_(std::make_shared<const ChannelSnapshot>()) {}

std::uint64_t SharedChannel::publish(const std::string& agent_id, ProcessRole role, std::size_t step) {
    role.validate();
    auto stored = std::make_shared<const ProcessRole>(std::move(role));
    std::lock_guard<std::mutex> lock(mutex_);
    auto next = std::make_shared<ChannelSnapshot>(*current_);
    const std::uint64_t version = ++counter_;
    next->roles[agent_id] = ChannelEntry{std::move(stored), version, step};
    current_ = std::move(next);
    return version;
}

std::uint64_t SharedChannel::publish_environment(std::shared_ptr<const Environment> environment) {
    if (!environment)
        throw InputError("cannot publish an empty environment");
    std::lock_guard<std::mutex> lock(mutex_);
    auto next = std::make_shared<ChannelSnapshot>(*current_);
    const std::uint64_t version = ++counter_;
    next->environment = std::move(environment);
    next->environment_version = version;
    current_ = std::move(next);
    return version;
}

std::optional<ChannelEntry> SharedChannel::subscribe(const std::string& agent_id) const {
    const std::shared_ptr<const ChannelSnapshot> snap = snapshot();
    const ChannelEntry* entry = snap->find(agent_id);
    if (entry == nullptr)
        return std::nullopt;
    return *entry;
}

std::shared_ptr<const ChannelSnapshot> SharedChannel::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return current_;
}

} // namespace role_engine
