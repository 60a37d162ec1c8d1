"""Host-name helpers: the TLD list used by the URL grammar and apex-domain extraction.

Both tables are static snapshots so results do not depend on network access.
"""

from __future__ import annotations

# TLDs accepted by the in-text URL grammar. Deliberately excludes TLDs that
# collide with common file extensions or words (py, js, in, is, it, at, ...).
URL_TLDS: frozenset[str] = frozenset(
    """
    com cc xyz net vip fun cn org io me tv app top site online shop win bet vn kr jp
    info biz co us uk fr de ru ba ee hk tw la ph th sg my au ca nl pl br es eu
    club live link pro asia
    """.split()
)

# Multi-label public suffixes (registrable domain = one label below these).
# Any TLD not covered here falls back to the implicit "*" rule.
PUBLIC_SUFFIXES: frozenset[str] = frozenset(
    """
    co.uk org.uk ac.uk gov.uk me.uk net.uk ltd.uk plc.uk
    com.cn net.cn org.cn gov.cn edu.cn ac.cn
    com.hk org.hk net.hk edu.hk gov.hk
    com.tw org.tw net.tw edu.tw gov.tw idv.tw
    com.au net.au org.au edu.au gov.au
    co.jp ne.jp or.jp ac.jp go.jp
    co.kr or.kr ne.kr ac.kr go.kr
    com.br net.br org.br gov.br
    com.vn net.vn org.vn edu.vn gov.vn
    co.in net.in org.in
    com.sg edu.sg gov.sg
    com.my net.my org.my
    co.id or.id ac.id
    com.mx org.mx
    com.tr org.tr
    com.ph net.ph
    co.th in.th ac.th
    com.ar com.co com.pe com.ua com.ru
    co.nz org.nz
    co.za org.za
    github.io gitlab.io blogspot.com herokuapp.com appspot.com netlify.app vercel.app
    pages.dev workers.dev fandom.com
    """.split()
)


def normalize_host(host: str) -> str:
    return host.strip().strip(".").lower()


def apex_domain(host: str) -> str:
    """Registrable domain (public suffix plus one label) of ``host``.

    IP literals and single-label hosts are returned unchanged.
    """
    host = normalize_host(host)
    labels = host.split(".")
    if len(labels) < 2 or host.replace(".", "").isdigit():
        return host
    for n_suffix in (3, 2):
        if len(labels) > n_suffix and ".".join(labels[-n_suffix:]) in PUBLIC_SUFFIXES:
            return ".".join(labels[-(n_suffix + 1):])
    return ".".join(labels[-2:])
