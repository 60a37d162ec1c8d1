"""Seeded generators for the desk-scale corpora used to train and exercise the pipeline.

IPTs follow the usual anatomy: category keywords, a short selling pitch and a
contact segment, glued together with brackets, emoji and punctuation. Benign
texts imitate ordinary on-site search queries, including some that carry
digits, domains or brackets so the classifiers cannot rely on one cue.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field

from .records import CategoryLabel, ContactKind
from .reflection import instantiate, site_prefix, urs_from_template

C = CategoryLabel

CATEGORY_VOCAB: dict[CategoryLabel, tuple[str, ...]] = {
    C.GAMBLING: ("博彩", "赌场", "百家乐", "体育投注", "真人娱乐", "开户送彩金", "casino", "baccarat", "slots", "poker room"),
    C.SEX: ("上门服务", "同城约会", "外围女", "包夜", "援交", "escort girls", "hookup", "adult massage"),
    C.FAKE_CERTIFICATE: ("办证", "毕业证", "学历认证", "驾驶证", "文凭", "diploma", "certificate", "fake degree"),
    C.DRUGS: ("冰毒", "大麻", "迷药", "听话水", "催情药", "cannabis", "weed", "meth pills"),
    C.COUNTERFEIT: ("高仿手表", "奢侈品复刻", "一比一包包", "莆田鞋", "replica watches", "fake handbags"),
    C.HACKING: ("黑客接单", "破解密码", "入侵网站", "查开房记录", "ddos攻击", "hacker for hire", "crack account"),
    C.DATA_THEFT: ("个人信息", "数据出售", "手机号段", "身份证信息", "leaked database", "fullz", "data dump"),
    C.FAKE_ACCOUNT: ("小号出售", "实名小号", "账号批发", "接码平台", "buy accounts", "aged accounts"),
    C.SURROGACY: ("代孕", "试管婴儿", "供卵", "代孕包成功", "surrogacy", "egg donor"),
    C.WEAPONS: ("仿真枪", "气枪", "军用弩", "猎枪", "guns for sale", "airsoft rifle"),
    C.FINANCIAL_FRAUD: ("贷款秒批", "信用卡套现", "刷单返利", "征信修复", "instant loan", "credit repair"),
    C.MONEY_LAUNDERING: ("跑分", "洗钱", "代收代付", "usdt承兑", "money mule", "usdt exchange"),
    C.BLACKHAT_SEO: ("蜘蛛池", "快速排名", "外链代发", "泛目录", "seo ranking", "backlinks"),
    C.OTHERS: ("代写论文", "代考", "刷粉丝", "essay writing", "exam proxy"),
}

PITCHES = (
    "诚信经营", "安全可靠", "24小时在线", "全国包邮", "价格优惠", "保证真实", "当天出货",
    "欢迎咨询", "信誉第一", "1对1服务", "秒到账", "fast delivery", "100% safe", "best price",
    "支持验货", "不成功不收费",
)

BENIGN_QUERIES = (
    "天气预报", "家常菜谱", "北京旅游攻略", "高考分数线", "python教程", "电影推荐", "手机价格",
    "今日新闻", "how to bake bread", "weather tomorrow", "best laptops", "chicken recipes",
    "football scores", "library opening hours", "图书馆开放时间", "英语四级真题", "租房信息",
    "yoga for beginners", "travel insurance", "地铁线路图", "宠物医院", "university rankings",
    "opening a bank account", "二手车评估", "free pdf reader", "中秋节放假安排",
)

HARD_NEGATIVES = (
    "amazon.com reviews", "iphone 15 价格 5999元", "2024年国庆放假安排", "github.com python",
    "【官方】产品说明书下载", "bilibili.com 视频", "windows 11 安装教程", "report_2023.pdf",
    "湖人vs勇士 120:115", "office 365 价格", "tel: service hours 9-18", "qq音乐 下载",
    "微博热搜榜", "telegram desktop download", "wechat pay help",
)

SEPARATORS = ("✅", "🔥", "★", "⭐", "💰", "➕", "|", "，", " ", "~", "👉", "❤")
BRACKET_PAIRS = (("【", "】"), ("[", "]"), ("『", "』"), ("{", "}"), ("", ""))

INDICATOR_FORMS = {
    ContactKind.TELEGRAM: ("telegram", "tg", "TG", "飞机", "纸飞机", "电报"),
    ContactKind.WECHAT: ("微信", "微", "薇", "V信", "vx", "wx"),
    ContactKind.QQ: ("QQ", "qq", "扣扣", "企鹅"),
    ContactKind.PHONE: ("电话", "手机", "热线", "Tel", "call"),
}
CONTACT_PREFIXES = ("", "询", "联系", "加", "咨询", "认准")
DESK_TLDS = ("com", "cc", "xyz", "net", "vip", "fun", "top", "me", "app", "site", "bet", "win")


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_handle(rng: random.Random, lo: int = 5, hi: int = 10, hyphen: bool = False) -> str:
    size = rng.randint(lo, hi)
    alphabet = string.ascii_lowercase + string.digits + "_" + ("-" if hyphen else "")
    body = "".join(rng.choice(alphabet) for _ in range(size - 2))
    return rng.choice(string.ascii_lowercase) + body + rng.choice(string.digits)


def random_value(rng: random.Random, kind: ContactKind) -> str:
    if kind == ContactKind.TELEGRAM:
        return random_handle(rng, 5, 12)
    if kind == ContactKind.WECHAT:
        return random_handle(rng, 6, 14, hyphen=True)
    if kind == ContactKind.QQ:
        return str(rng.randint(1, 9)) + "".join(rng.choice(string.digits) for _ in range(rng.randint(5, 9)))
    if kind == ContactKind.PHONE:
        return "1" + rng.choice("3456789") + "".join(rng.choice(string.digits) for _ in range(9))
    if kind == ContactKind.WEBSITE:
        return random_handle(rng, 4, 9).replace("_", "") + "." + rng.choice(DESK_TLDS)
    raise ValueError(kind)


def contact_segment(rng: random.Random, kind: ContactKind, value: str | None = None) -> tuple[str, str]:
    """(segment text, contact value) for one contact of ``kind``."""
    value = value or random_value(rng, kind)
    if kind == ContactKind.WEBSITE:
        return rng.choice(("", "网址", "访问", "官网 ", "")) + value, value
    ind = rng.choice(INDICATOR_FORMS[kind])
    sep = rng.choice((":", "：", "", " ")) if kind != ContactKind.PHONE else rng.choice((":", "：", " "))
    at = "@" if kind == ContactKind.TELEGRAM and rng.random() < 0.6 else ""
    return f"{rng.choice(CONTACT_PREFIXES)}{ind}{sep}{at}{value}", value


@dataclass(frozen=True)
class SynthIpt:
    text: str
    categories: frozenset
    contact_kind: ContactKind
    contact_value: str
    contact_segment: str
    extra_website: str | None = None


def make_ipt(
    rng: random.Random,
    category: CategoryLabel | None = None,
    kind: ContactKind | None = None,
    segment: str | None = None,
    value: str | None = None,
    with_website: float = 0.2,
) -> SynthIpt:
    category = category or rng.choice(list(CATEGORY_VOCAB))
    kind = kind or rng.choice([k for k in ContactKind if k != ContactKind.OTHER])
    if segment is None:
        segment, value = contact_segment(rng, kind, value)
    vocab = CATEGORY_VOCAB[category]
    keywords = rng.sample(vocab, k=min(len(vocab), rng.randint(1, 2)))
    left, right = rng.choice(BRACKET_PAIRS)
    head = left + rng.choice(SEPARATORS).strip().join(keywords) + right
    parts = [head, rng.choice(PITCHES)]
    site = None
    if with_website and kind != ContactKind.WEBSITE and rng.random() < with_website:
        site = random_value(rng, ContactKind.WEBSITE)
        parts.append(site)
    rng.shuffle(parts[1:])
    sep = rng.choice(SEPARATORS)
    cl, cr = rng.choice(BRACKET_PAIRS)
    text = sep.join(parts) + rng.choice(SEPARATORS) + f"{cl}{segment}{cr}"
    if rng.random() < 0.3:
        text += rng.choice(SEPARATORS)
    return SynthIpt(text, frozenset({category}), kind, value, segment, site)


def make_benign(rng: random.Random, hard: float = 0.25) -> str:
    if rng.random() < hard:
        return rng.choice(HARD_NEGATIVES)
    q = rng.choice(BENIGN_QUERIES)
    roll = rng.random()
    if roll < 0.2:
        q = f"{q} {rng.randint(2015, 2025)}"
    elif roll < 0.3:
        q = f"{q} {rng.choice(BENIGN_QUERIES)}"
    return q


def binary_corpus(n: int = 600, seed=0, positive_share: float = 0.5) -> list[tuple[str, int]]:
    """Labeled ``(text, 1 if IPT else 0)`` pairs in shuffled order."""
    rng = _rng(seed)
    n_pos = int(round(n * positive_share))
    rows = [(make_ipt(rng).text, 1) for _ in range(n_pos)]
    rows += [(make_benign(rng), 0) for _ in range(n - n_pos)]
    rng.shuffle(rows)
    return rows


def segment_corpus(n: int = 600, seed=0) -> list[tuple[str, int]]:
    """Candidate segments labeled 1 when they carry an IM/phone contact."""
    rng = _rng(seed)
    negatives = [w for vocab in CATEGORY_VOCAB.values() for w in vocab] + list(PITCHES) + list(BENIGN_QUERIES)
    rows = []
    kinds = [ContactKind.TELEGRAM, ContactKind.WECHAT, ContactKind.QQ, ContactKind.PHONE]
    for i in range(n):
        if i % 2 == 0:
            rows.append((contact_segment(rng, rng.choice(kinds))[0], 1))
        else:
            rows.append((rng.choice(negatives), 0))
    rng.shuffle(rows)
    return rows


def contact_type_corpus(n: int = 600, seed=0) -> list[tuple[str, str]]:
    """IPT texts labeled with their dominant contact kind (``Other`` when contact-free)."""
    rng = _rng(seed)
    kinds = [k for k in ContactKind if k != ContactKind.OTHER]
    rows = []
    for i in range(n):
        if i % 7 == 6:
            text = rng.choice([make_benign(rng, hard=0.0), rng.choice(PITCHES)])
            rows.append((text, ContactKind.OTHER.value))
            continue
        ipt = make_ipt(rng, kind=kinds[i % len(kinds)])
        rows.append((ipt.text, ipt.contact_kind.value))
    rng.shuffle(rows)
    return rows


def category_text(rng: random.Random, categories, n_words: int | None = None) -> str:
    words = []
    for cat in categories:
        words += rng.sample(CATEGORY_VOCAB[cat], k=min(2, len(CATEGORY_VOCAB[cat])))
    rng.shuffle(words)
    pitch = rng.choice(PITCHES)
    sep = rng.choice(SEPARATORS)
    return sep.join(words + [pitch])


def multilabel_corpus(n: int = 900, seed=0, multi_share: float = 0.1, benign_share: float = 0.15):
    """``(text, label set)`` pairs covering every illicit category plus Benign."""
    rng = _rng(seed)
    cats = list(CATEGORY_VOCAB)
    rows = []
    for i in range(n):
        roll = rng.random()
        if roll < benign_share:
            rows.append((make_benign(rng, hard=0.0), frozenset({C.BENIGN})))
        elif roll < benign_share + multi_share:
            pair = rng.sample(cats, 2)
            rows.append((category_text(rng, pair), frozenset(pair)))
        else:
            cat = cats[i % len(cats)]
            rows.append((category_text(rng, [cat]), frozenset({cat})))
    return rows


# ---------------------------------------------------------------------------
# mock worlds


@dataclass
class PlantedIpt:
    text: str
    urs_template: str
    contact_keyword: str
    url: str
    component: int


@dataclass
class SnowballWorld:
    rows: list[dict]
    planted: list[PlantedIpt]
    seed_keyword: str
    seed_urs: str
    urs_templates: list[str]
    contact_keywords: list[str]
    site_prefixes: dict[str, str] = field(default_factory=dict)

    def reachable(self, seed_keywords, seed_urs) -> set[str]:
        """Texts of planted IPTs reachable from the seeds over the keyword/URS bipartite graph."""
        kws, urses = set(seed_keywords), set(seed_urs)
        found: set[str] = set()
        while True:
            hit = [p for p in self.planted if p.contact_keyword in kws or p.urs_template in urses]
            new_k = {p.contact_keyword for p in hit} - kws
            new_u = {p.urs_template for p in hit} - urses
            found |= {p.text for p in hit}
            if not new_k and not new_u:
                return found
            kws |= new_k
            urses |= new_u


def _site_row(url, title, body, terms=()):
    return {
        "url": url,
        "title": title,
        "snippet": body[:80],
        "body_text_by_location": {"title": title, "body_text": body},
        "index_terms": list(terms),
    }


def snowball_world(
    n_ipts: int = 100,
    n_urs: int = 10,
    n_contacts: int = 20,
    n_isolated: int = 3,
    benign_per_site: int = 3,
    seed=0,
) -> SnowballWorld:
    """A mock search corpus with planted IPTs on reflecting sites.

    Every IPT sits on one URS and carries one contact segment; the
    URS/contact bipartite graph of the main component is connected. A small
    isolated component (own URS and contact) is unreachable from the seeds.
    """
    rng = _rng(seed)
    templates = [f"https://search{i}.reflect{i}.com/s?q={{R}}" for i in range(n_urs)]
    iso_template = "https://lonely.island-site.net/find/{R}"
    contacts = []
    kinds = [ContactKind.TELEGRAM, ContactKind.WECHAT, ContactKind.QQ, ContactKind.WEBSITE]
    used = set()
    while len(contacts) < n_contacts:
        seg, value = contact_segment(rng, kinds[len(contacts) % len(kinds)])
        if seg in used or any(seg in u or u in seg for u in used):
            continue
        used.add(seg)
        contacts.append((seg, value))
    iso_seg, _ = ("联系tg:@isolated_seller9", "isolated_seller9")
    keyword_of = {}
    for seg, value in contacts:
        # a website contact is searched for by its host, other contacts by the segment
        keyword_of[seg] = value if "." in value else seg

    pairs = []
    # spanning structure: contact j links URS j % n_urs and URS (j+1) % n_urs
    for j in range(n_contacts):
        pairs.append((j % n_urs, j))
        pairs.append(((j + 1) % n_urs, j))
    while len(pairs) < n_ipts:
        pairs.append((rng.randrange(n_urs), rng.randrange(n_contacts)))
    planted, rows, texts = [], [], set()
    for u, c in pairs[:n_ipts]:
        seg, value = contacts[c]
        kind = ContactKind.WEBSITE if "." in value else None
        for _ in range(50):
            ipt = make_ipt(rng, kind=kind or ContactKind.TELEGRAM, segment=seg, value=value, with_website=0)
            if ipt.text not in texts:
                break
        texts.add(ipt.text)
        url = instantiate(templates[u], ipt.text)
        planted.append(PlantedIpt(ipt.text, templates[u], keyword_of[seg], url, 0))
    for k in range(n_isolated):
        ipt = make_ipt(rng, kind=ContactKind.TELEGRAM, segment=iso_seg, value="isolated_seller9", with_website=0)
        planted.append(PlantedIpt(ipt.text, iso_template, iso_seg, instantiate(iso_template, ipt.text), 1))
    rng.shuffle(planted)
    for p in planted:
        site = urs_from_template(p.urs_template).fqdn
        title = f"{p.text} - {site} 搜索结果"
        rows.append(_site_row(p.url, title, f"您搜索的是 {p.text} 共找到0条结果"))
    for t in templates + [iso_template]:
        site = urs_from_template(t).fqdn
        for _ in range(benign_per_site):
            q = make_benign(rng, hard=0.0)
            url = instantiate(t, q)
            rows.append(_site_row(url, f"{q} - {site} 搜索结果", f"您搜索的是 {q}"))
        rows.append(_site_row(f"https://{site}/about", f"关于我们 {site}", "static page about the site"))
    rng.shuffle(rows)
    return SnowballWorld(
        rows=rows,
        planted=planted,
        seed_keyword=keyword_of[contacts[0][0]],
        seed_urs=templates[0],
        urs_templates=templates + [iso_template],
        contact_keywords=[keyword_of[s] for s, _ in contacts] + [iso_seg],
        site_prefixes={t: site_prefix(t) for t in templates + [iso_template]},
    )


def exposure_world(
    n_keywords: int = 20,
    results_per_keyword: int = 100,
    seed=0,
) -> tuple[list[dict], list[str], dict[str, int | None]]:
    """A ranking corpus for exposure probing.

    Returns ``(rows, keywords, first_ipt_rank)`` where ``first_ipt_rank[k]`` is
    the rank of the first IPT in the results for keyword ``k`` (``None`` when
    the keyword's results are clean). Every row of a keyword has term
    frequency 1 so results rank in corpus order.
    """
    rng = _rng(seed)
    rank_choices = [None, 1, 3, 10, 11, 20, 35, 50, 51, 99, 100]
    keywords = [f"kw{i:02d}term" for i in range(n_keywords)]
    first_rank: dict[str, int | None] = {}
    rows = []
    for i, kw in enumerate(keywords):
        target = rank_choices[i % len(rank_choices)]
        first_rank[kw] = target
        for r in range(1, results_per_keyword + 1):
            if target is not None and r >= target and (r == target or rng.random() < 0.1):
                title = make_ipt(rng, with_website=0).text
            else:
                title = make_benign(rng, hard=0.0)
            url = f"https://site{i}-{r}.example.com/page?id={r}"
            rows.append({
                "url": url,
                "title": title,
                "snippet": title,
                "body_text_by_location": {"title": title},
                "index_terms": [kw],
            })
    return rows, keywords, first_rank
