#include "coapicn/icn/name.hpp"

#include "coapicn/coap/message.hpp"

namespace coapicn::icn {

std::string to_hex(const Identifier& id)
{
    return coapicn::to_hex(BytesView(id.data(), id.size()));
}

std::string to_string(const IcnName& name)
{
    return to_hex(name.scope_id) + "/" + to_hex(name.rendezvous_id);
}

}  // namespace coapicn::icn
